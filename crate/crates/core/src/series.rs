//! Daily case panels: CSV ingest with calendar alignment, the log/EMA
//! normalisation, and sliding training windows.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate};
use serde::Deserialize;

pub const DEFAULT_ALPHA: f64 = 0.1;
pub const INPUT_LEN: usize = 10;
pub const HORIZON: usize = 7;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SeriesError {
    #[error("cases csv row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("cases csv row {row}: duplicate entry for region `{region}` on {date}")]
    Duplicate {
        row: usize,
        region: String,
        date: NaiveDate,
    },
    #[error("cases csv: {0}")]
    Csv(String),
    #[error("case panel has no rows")]
    Empty,
    #[error("series too short: need at least {minimum} days, got {actual}")]
    TooShort { minimum: usize, actual: usize },
    #[error("invalid smoothing factor {0}; expected 0 < alpha <= 1")]
    Alpha(f64),
    #[error("unknown region `{0}`")]
    UnknownRegion(String),
    #[error("cutoff {cutoff} outside panel range {first}..={last}")]
    Cutoff {
        cutoff: NaiveDate,
        first: NaiveDate,
        last: NaiveDate,
    },
    #[error("inconsistent panel: {0}")]
    Inconsistent(String),
}

/// Daily new-case counts for a set of regions over one contiguous calendar.
#[derive(Debug, Clone, PartialEq)]
pub struct CasePanel {
    regions: Vec<String>,
    start: NaiveDate,
    counts: Vec<Vec<u64>>,
}

impl CasePanel {
    pub fn new(regions: Vec<String>, start: NaiveDate, counts: Vec<Vec<u64>>) -> Result<Self, SeriesError> {
        if regions.len() != counts.len() {
            return Err(SeriesError::Inconsistent(format!(
                "{} regions but {} count rows",
                regions.len(),
                counts.len()
            )));
        }
        let days = counts.first().map_or(0, Vec::len);
        if let Some((r, _)) = regions.iter().zip(&counts).find(|(_, c)| c.len() != days) {
            return Err(SeriesError::Inconsistent(format!(
                "region `{r}` does not cover the full date range"
            )));
        }
        let unique: BTreeSet<&String> = regions.iter().collect();
        if unique.len() != regions.len() {
            return Err(SeriesError::Inconsistent("duplicate region ids".into()));
        }
        Ok(Self {
            regions,
            start,
            counts,
        })
    }

    pub fn regions(&self) -> &[String] {
        &self.regions
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    pub fn len_days(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    pub fn last_date(&self) -> NaiveDate {
        self.date(self.len_days().saturating_sub(1))
    }

    pub fn date(&self, index: usize) -> NaiveDate {
        self.start + Duration::days(index as i64)
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        (0..self.len_days()).map(|i| self.date(i)).collect()
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn region_index(&self, region: &str) -> Result<usize, SeriesError> {
        self.regions
            .iter()
            .position(|r| r == region)
            .ok_or_else(|| SeriesError::UnknownRegion(region.to_string()))
    }

    pub fn series(&self, region: &str) -> Result<&[u64], SeriesError> {
        Ok(&self.counts[self.region_index(region)?])
    }

    /// Panel restricted to dates `<= cutoff`.
    pub fn truncate(&self, cutoff: NaiveDate) -> Result<CasePanel, SeriesError> {
        if cutoff < self.start || cutoff > self.last_date() {
            return Err(SeriesError::Cutoff {
                cutoff,
                first: self.start,
                last: self.last_date(),
            });
        }
        let keep = (cutoff - self.start).num_days() as usize + 1;
        Ok(CasePanel {
            regions: self.regions.clone(),
            start: self.start,
            counts: self.counts.iter().map(|c| c[..keep].to_vec()).collect(),
        })
    }

    /// Serialise as `date,region_id,new_cases`, region-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("date,region_id,new_cases\n");
        for (region, counts) in self.regions.iter().zip(&self.counts) {
            for (i, c) in counts.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", self.date(i), region, c));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadSummary {
    /// Number of `(region, date)` pairs absent from the file and set to zero.
    pub filled_gaps: usize,
}

#[derive(Deserialize)]
struct CaseRow {
    date: String,
    region_id: String,
    new_cases: String,
}

/// Parse a `date,region_id,new_cases` CSV into a calendar-aligned panel.
///
/// Regions are ordered by id. Missing pairs inside the global date range are
/// zero-filled and counted in the returned summary.
pub fn load_cases(reader: impl Read) -> Result<(CasePanel, LoadSummary), SeriesError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut cells: BTreeMap<String, BTreeMap<NaiveDate, u64>> = BTreeMap::new();
    for (i, rec) in rdr.deserialize::<CaseRow>().enumerate() {
        // header is row 1
        let row = i + 2;
        let rec = rec.map_err(|e| SeriesError::Row {
            row,
            message: e.to_string(),
        })?;
        let date = NaiveDate::parse_from_str(&rec.date, "%Y-%m-%d").map_err(|_| SeriesError::Row {
            row,
            message: format!("unparseable date `{}`", rec.date),
        })?;
        let count: i64 = rec.new_cases.parse().map_err(|_| SeriesError::Row {
            row,
            message: format!("unparseable count `{}`", rec.new_cases),
        })?;
        if count < 0 {
            return Err(SeriesError::Row {
                row,
                message: format!("negative count {count}"),
            });
        }
        if rec.region_id.is_empty() {
            return Err(SeriesError::Row {
                row,
                message: "empty region_id".into(),
            });
        }
        let region = cells.entry(rec.region_id.clone()).or_default();
        if region.insert(date, count as u64).is_some() {
            return Err(SeriesError::Duplicate {
                row,
                region: rec.region_id,
                date,
            });
        }
    }
    let first = cells.values().filter_map(|m| m.keys().next()).min().copied();
    let last = cells.values().filter_map(|m| m.keys().next_back()).max().copied();
    let (Some(first), Some(last)) = (first, last) else {
        return Err(SeriesError::Empty);
    };
    let days = (last - first).num_days() as usize + 1;
    let mut summary = LoadSummary::default();
    let mut regions = Vec::with_capacity(cells.len());
    let mut counts = Vec::with_capacity(cells.len());
    for (region, by_date) in cells {
        let mut series = vec![0u64; days];
        for (d, c) in &by_date {
            series[(*d - first).num_days() as usize] = *c;
        }
        summary.filled_gaps += days - by_date.len();
        regions.push(region);
        counts.push(series);
    }
    Ok((CasePanel::new(regions, first, counts)?, summary))
}

pub fn load_cases_path(path: &Path) -> Result<(CasePanel, LoadSummary), SeriesError> {
    let file = std::fs::File::open(path)
        .map_err(|e| SeriesError::Csv(format!("{}: {e}", path.display())))?;
    load_cases(file)
}

/// Exponential moving average: `v[0] = s[0]`, `v[t] = a * s[t] + (1 - a) * v[t-1]`.
pub fn ema(series: &[f64], alpha: f64) -> Result<Vec<f64>, SeriesError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(SeriesError::Alpha(alpha));
    }
    let Some(&first) = series.first() else {
        return Err(SeriesError::TooShort {
            minimum: 1,
            actual: 0,
        });
    };
    let mut out = Vec::with_capacity(series.len());
    let mut level = first;
    out.push(level);
    for &s in &series[1..] {
        level = alpha * s + (1.0 - alpha) * level;
        out.push(level);
    }
    Ok(out)
}

/// Day of week with Monday = 0.
pub fn day_of_week(date: NaiveDate) -> usize {
    date.weekday().num_days_from_monday() as usize
}

/// Log counts, EMA levels and weekday indices for every region of a panel.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedPanel {
    pub regions: Vec<String>,
    pub start: NaiveDate,
    pub raw: Vec<Vec<f64>>,
    /// `ln(x + 1)`
    pub log_counts: Vec<Vec<f64>>,
    /// EMA of `x + 1`, so every level is at least 1.
    pub ema_level: Vec<Vec<f64>>,
    pub dow: Vec<usize>,
}

impl PreparedPanel {
    pub fn len_days(&self) -> usize {
        self.dow.len()
    }

    pub fn date(&self, index: usize) -> NaiveDate {
        self.start + Duration::days(index as i64)
    }

    pub fn region_index(&self, region: &str) -> Result<usize, SeriesError> {
        self.regions
            .iter()
            .position(|r| r == region)
            .ok_or_else(|| SeriesError::UnknownRegion(region.to_string()))
    }

    /// Inputs normalised by the level at `end - 1`, for the `len` days ending
    /// just before `end`.
    pub fn normalized_input(&self, region: usize, end: usize, len: usize) -> (Vec<f64>, f64) {
        let anchor = self.ema_level[region][end - 1];
        let shift = anchor.ln();
        let input = self.log_counts[region][end - len..end]
            .iter()
            .map(|x| x - shift)
            .collect();
        (input, anchor)
    }
}

pub fn prepare(panel: &CasePanel, alpha: f64) -> Result<PreparedPanel, SeriesError> {
    if panel.len_days() == 0 {
        return Err(SeriesError::Empty);
    }
    let mut raw = Vec::with_capacity(panel.regions.len());
    let mut log_counts = Vec::with_capacity(panel.regions.len());
    let mut ema_level = Vec::with_capacity(panel.regions.len());
    for counts in &panel.counts {
        let x: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let shifted: Vec<f64> = x.iter().map(|v| v + 1.0).collect();
        log_counts.push(shifted.iter().map(|s| s.ln()).collect());
        ema_level.push(ema(&shifted, alpha)?);
        raw.push(x);
    }
    Ok(PreparedPanel {
        regions: panel.regions.clone(),
        start: panel.start,
        raw,
        log_counts,
        ema_level,
        dow: panel.dates().into_iter().map(day_of_week).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingWindow {
    pub region: usize,
    /// Index of the first target day.
    pub target_start: usize,
    pub input: Vec<f64>,
    pub target: Vec<f64>,
    pub dow_future: Vec<usize>,
    pub anchor_level: f64,
}

/// Every `(input_len, horizon)` window of every region, region-major.
pub fn make_windows(
    prep: &PreparedPanel,
    input_len: usize,
    horizon: usize,
) -> Result<Vec<TrainingWindow>, SeriesError> {
    let days = prep.len_days();
    let minimum = input_len + horizon;
    if days < minimum {
        return Err(SeriesError::TooShort {
            minimum,
            actual: days,
        });
    }
    let per_region = days - minimum + 1;
    let mut out = Vec::with_capacity(per_region * prep.regions.len());
    for region in 0..prep.regions.len() {
        for w in 0..per_region {
            let end = w + input_len;
            let (input, anchor_level) = prep.normalized_input(region, end, input_len);
            out.push(TrainingWindow {
                region,
                target_start: end,
                input,
                target: prep.raw[region][end..end + horizon].to_vec(),
                dow_future: prep.dow[end..end + horizon].to_vec(),
                anchor_level,
            });
        }
    }
    Ok(out)
}
