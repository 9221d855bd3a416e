use nalgebra::{DMatrix, DVector};

use crate::series::CasePanel;

use super::ForecastError;

const SEASON: usize = 7;
/// Log-space forecasts above this are capped before inverting.
const MAX_LOG_LEVEL: f64 = 30.0;

/// Repeats the last observed week: `yhat[T + i] = y[T + i - 7]`.
pub fn seasonal_naive(panel: &CasePanel, region: &str, horizon: usize) -> Result<Vec<f64>, ForecastError> {
    let series = panel.series(region)?;
    seasonal_naive_series(series, region, horizon)
}

fn seasonal_naive_series(series: &[u64], region: &str, horizon: usize) -> Result<Vec<f64>, ForecastError> {
    if series.len() < SEASON {
        return Err(ForecastError::TooShort {
            region: region.to_string(),
            minimum: SEASON,
            actual: series.len(),
        });
    }
    let last_week = &series[series.len() - SEASON..];
    Ok((0..horizon).map(|i| last_week[i % SEASON] as f64).collect())
}

/// Least-squares AR(p) coefficients with intercept: `[c, phi_1, .., phi_p]`.
///
/// Rank-deficient designs get the minimum-norm solution. Returns `None` when
/// the design has rank zero or the solve is not finite.
pub fn fit_ar_ols(series: &[f64], p: usize) -> Option<Vec<f64>> {
    if series.len() <= p {
        return None;
    }
    let rows = series.len() - p;
    let design = DMatrix::from_fn(rows, p + 1, |r, c| if c == 0 { 1.0 } else { series[r + p - c] });
    let target = DVector::from_fn(rows, |r, _| series[r + p]);
    let svd = design.svd(true, true);
    let max_sv = svd.singular_values.max();
    if !(max_sv > 0.0) {
        return None;
    }
    let coef = svd.solve(&target, max_sv * 1e-10).ok()?;
    coef.iter().all(|v| v.is_finite()).then(|| coef.iter().copied().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArForecast {
    pub values: Vec<f64>,
    /// Set when the regression could not be solved and seasonal naive was used.
    pub fell_back: bool,
}

/// AR(p) on the `d`-times differenced `ln(x + 1)` series, fit by OLS,
/// iterated `horizon` steps and mapped back to counts.
pub fn ar_ols(
    panel: &CasePanel,
    region: &str,
    p: usize,
    d: usize,
    horizon: usize,
) -> Result<ArForecast, ForecastError> {
    let raw = panel.series(region)?;
    let minimum = p + d + 1;
    if raw.len() < minimum {
        return Err(ForecastError::TooShort {
            region: region.to_string(),
            minimum,
            actual: raw.len(),
        });
    }
    let logs: Vec<f64> = raw.iter().map(|&x| (x as f64 + 1.0).ln()).collect();
    match ar_forecast_log(&logs, p, d, horizon) {
        Some(path) => Ok(ArForecast {
            values: path
                .iter()
                .map(|y| (y.min(MAX_LOG_LEVEL).exp() - 1.0).max(0.0))
                .collect(),
            fell_back: false,
        }),
        None => Ok(ArForecast {
            values: seasonal_naive_series(raw, region, horizon)?,
            fell_back: true,
        }),
    }
}

/// Fits AR(p) to the `d`-times differenced series and returns the iterated
/// forecast on the original (undifferenced) scale.
pub fn ar_forecast_log(series: &[f64], p: usize, d: usize, horizon: usize) -> Option<Vec<f64>> {
    if series.len() < p + d + 1 {
        return None;
    }
    // levels[j] is the j-times differenced series
    let mut levels = vec![series.to_vec()];
    for j in 0..d {
        let next: Vec<f64> = levels[j].windows(2).map(|w| w[1] - w[0]).collect();
        levels.push(next);
    }
    let coef = fit_ar_ols(&levels[d], p)?;
    let mut history = levels[d].clone();
    let mut last: Vec<f64> = levels.iter().map(|l| *l.last().unwrap()).collect();
    let mut out = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let n = history.len();
        let next = coef[0] + (1..=p).map(|k| coef[k] * history[n - k]).sum::<f64>();
        history.push(next);
        last[d] = next;
        for j in (0..d).rev() {
            last[j] += last[j + 1];
        }
        out.push(last[0]);
    }
    Some(out)
}
