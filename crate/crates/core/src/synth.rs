//! Seeded synthetic stand-in for the case and static-variable inputs.
//!
//! Each region follows a logistic epidemic wave times a fixed weekly
//! reporting profile with lognormal noise. Static variables carry five
//! planted groups; the group also sets the size of the region's epidemic.

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::embed::{StaticTable, STATIC_COLUMNS};
use crate::series::{day_of_week, CasePanel, SeriesError};

/// Reporting multipliers, Monday first. Mean 1, Friday/Sunday = 3.
pub const WEEKLY_PROFILE: [f64; 7] = [1.05, 1.1, 1.1, 1.15, 1.35, 0.8, 0.45];
pub const GROUPS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub regions: usize,
    pub days: usize,
    pub start: NaiveDate,
    pub seed: u64,
    /// Sigma of the multiplicative lognormal count noise.
    pub noise: f64,
    /// Within-group spread of static variables, in units of the group spacing.
    pub static_noise: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            regions: 33,
            days: 180,
            start: NaiveDate::from_ymd_opt(2020, 3, 3).unwrap(),
            seed: 0,
            noise: 0.15,
            static_noise: 0.08,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthData {
    pub cases: CasePanel,
    pub statics: StaticTable,
    /// Planted group of each region, in region order.
    pub groups: Vec<usize>,
}

pub fn region_id(i: usize) -> String {
    format!("R{:02}", i + 1)
}

/// Peak daily cases before the weekly profile, per group.
const GROUP_SCALE: [f64; GROUPS] = [30.0, 80.0, 200.0, 500.0, 1200.0];

/// `(base, spread)` mapping a group coordinate to a plausible raw value.
fn column_scale(name: &str) -> (f64, f64) {
    match name {
        "altitude" => (1200.0, 500.0),
        "precipitation" => (2000.0, 600.0),
        "temperature" => (22.0, 4.0),
        "humidity" => (75.0, 8.0),
        "total_population" => (1_500_000.0, 600_000.0),
        "population_density" => (120.0, 50.0),
        "life_expectancy" => (75.0, 2.5),
        _ if name.starts_with("population_") || name == "women_population" => (20.0, 4.0),
        _ if name.starts_with("deaths_") => (60.0, 20.0),
        _ => (30.0, 10.0),
    }
}

pub fn generate(config: &SynthConfig) -> Result<SynthData, SeriesError> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let std_normal = Normal::<f64>::new(0.0, 1.0).expect("unit normal");
    let groups: Vec<usize> = (0..config.regions).map(|i| i % GROUPS).collect();

    // Each column places the groups at a shuffled set of evenly spaced
    // coordinates, so every feature subset still separates all groups.
    let levels: Vec<f64> = (0..GROUPS).map(|g| g as f64 - (GROUPS as f64 - 1.0) / 2.0).collect();
    let mut layout: Vec<Vec<f64>> = Vec::with_capacity(STATIC_COLUMNS.len());
    for name in STATIC_COLUMNS {
        let mut coords = levels.clone();
        // population stays ordered with the epidemic scale
        if name != "total_population" {
            coords.shuffle(&mut rng);
        }
        layout.push(coords);
    }

    let mut counts = Vec::with_capacity(config.regions);
    let mut values = Vec::with_capacity(config.regions);
    for &g in &groups {
        let amplitude = GROUP_SCALE[g] * (0.2 * std_normal.sample(&mut rng)).exp();
        let peak = rng.gen_range(100.0..200.0);
        let width = rng.gen_range(12.0..25.0);
        let series = (0..config.days)
            .map(|t| {
                let e = (-(t as f64 - peak) / width).exp();
                let wave = 0.5 + amplitude * 4.0 * e / ((1.0 + e) * (1.0 + e));
                let dow = day_of_week(config.start + chrono::Duration::days(t as i64));
                let eps = config.noise * std_normal.sample(&mut rng) - config.noise * config.noise / 2.0;
                (wave * WEEKLY_PROFILE[dow] * eps.exp()).round().max(0.0) as u64
            })
            .collect();
        counts.push(series);

        let row = STATIC_COLUMNS
            .iter()
            .zip(&layout)
            .map(|(name, coords)| {
                let (base, spread) = column_scale(name);
                let z = coords[g] + config.static_noise * std_normal.sample(&mut rng);
                base + spread * z
            })
            .collect();
        values.push(row);
    }

    let regions: Vec<String> = (0..config.regions).map(region_id).collect();
    Ok(SynthData {
        cases: CasePanel::new(regions.clone(), config.start, counts)?,
        statics: StaticTable { regions, values },
        groups,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bytes() {
        let cfg = SynthConfig::default();
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.cases.to_csv(), b.cases.to_csv());
        assert_eq!(a.statics.to_csv(), b.statics.to_csv());
        let c = generate(&SynthConfig { seed: 1, ..cfg }).unwrap();
        assert_ne!(a.cases.to_csv(), c.cases.to_csv());
    }

    #[test]
    fn default_calendar() {
        let d = generate(&SynthConfig::default()).unwrap();
        assert_eq!(d.cases.regions().len(), 33);
        assert_eq!(d.cases.len_days(), 180);
        assert_eq!(d.cases.last_date(), NaiveDate::from_ymd_opt(2020, 8, 29).unwrap());
        assert_eq!(d.statics.values[0].len(), 25);
    }

    #[test]
    fn friday_sunday_ratio_matches_profile() {
        let d = generate(&SynthConfig::default()).unwrap();
        let (mut fri, mut sun) = (0.0, 0.0);
        for series in d.cases.counts() {
            for (t, &c) in series.iter().enumerate() {
                match day_of_week(d.cases.date(t)) {
                    4 => fri += c as f64,
                    6 => sun += c as f64,
                    _ => {}
                }
            }
        }
        let ratio = fri / sun;
        let planted = WEEKLY_PROFILE[4] / WEEKLY_PROFILE[6];
        assert!((ratio / planted - 1.0).abs() < 0.1, "ratio {ratio}");
    }
}
