//! Seven-day quantile forecasts from a dilated causal convolution encoder
//! with a day-of-week aware dense decoder, plus two reference baselines.

mod baselines;
mod net;
mod train;

use std::io::Read;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::nn::NnError;
use crate::series::{day_of_week, PreparedPanel, SeriesError};

pub use baselines::{ar_forecast_log, ar_ols, fit_ar_ols, seasonal_naive, ArForecast};
pub use net::{build_model, EncoderBlock, ForecastModel, Gradients};
pub use train::{batch_loss_and_grad, rescale, train, Batch, TrainReport, EXP_CLAMP};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForecastError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("window input must have {expected} values, got {actual}")]
    WindowLength { expected: usize, actual: usize },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("invalid net config: {0}")]
    Config(String),
    #[error("no training windows available")]
    NoWindows,
    #[error("series for `{region}` too short: need {minimum} days, got {actual}")]
    TooShort {
        region: String,
        minimum: usize,
        actual: usize,
    },
    #[error("forecast csv: {0}")]
    Csv(String),
}

/// Architecture and training hyper-parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetConfig {
    pub filters: usize,
    pub kernel: usize,
    pub dilations: Vec<usize>,
    pub input_len: usize,
    pub horizon: usize,
    pub quantiles: Vec<f64>,
    pub day_embed_dim: usize,
    pub decoder_dims: Vec<usize>,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
    pub alpha: f64,
    pub use_day_embeddings: bool,
    /// Score the pinball loss on normalised log values instead of counts.
    pub log_space_loss: bool,
}

impl Default for NetConfig {
    fn default() -> Self {
        Self {
            filters: 128,
            kernel: 2,
            dilations: vec![1, 2, 3, 4, 5, 6],
            input_len: 10,
            horizon: 7,
            quantiles: vec![0.05, 0.5, 0.9],
            day_embed_dim: 1,
            decoder_dims: vec![64, 32],
            epochs: 4,
            lr: 0.001,
            batch_size: 32,
            seed: 0,
            alpha: 0.1,
            use_day_embeddings: true,
            log_space_loss: false,
        }
    }
}

impl NetConfig {
    pub fn validate(&self) -> Result<(), ForecastError> {
        let fail = |m: String| Err(ForecastError::Config(m));
        if self.quantiles.len() != 3 {
            return fail(format!("expected 3 quantiles, got {}", self.quantiles.len()));
        }
        if self.quantiles.iter().any(|q| !(*q > 0.0 && *q < 1.0))
            || self.quantiles.windows(2).any(|w| w[0] >= w[1])
        {
            return fail(format!(
                "quantiles must be strictly increasing in (0, 1): {:?}",
                self.quantiles
            ));
        }
        if self.filters == 0 || self.kernel == 0 || self.input_len == 0 || self.horizon == 0 {
            return fail("filters, kernel, input_len and horizon must be positive".into());
        }
        if self.dilations.is_empty() || self.dilations.contains(&0) {
            return fail("dilations must be non-empty and >= 1".into());
        }
        if self.day_embed_dim == 0 || self.decoder_dims.contains(&0) {
            return fail("layer widths must be positive".into());
        }
        if self.batch_size == 0 || !(self.lr > 0.0) {
            return fail("batch_size and lr must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return fail(format!("alpha {} outside (0, 1]", self.alpha));
        }
        Ok(())
    }

    pub fn decoder_input_dim(&self) -> usize {
        self.filters + self.horizon * self.day_embed_dim
    }
}

/// Quantile forecast for one region, on the count scale.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    pub region: String,
    pub dates: Vec<NaiveDate>,
    pub q05: Vec<f64>,
    pub q50: Vec<f64>,
    pub q90: Vec<f64>,
}

impl ForecastResult {
    pub fn point(&self) -> &[f64] {
        &self.q50
    }

    pub fn mean_q50(&self) -> f64 {
        self.q50.iter().sum::<f64>() / self.q50.len().max(1) as f64
    }
}

/// Forecast the `horizon` days following the panel's last date.
pub fn predict(
    model: &ForecastModel,
    prep: &PreparedPanel,
    region: &str,
) -> Result<ForecastResult, ForecastError> {
    let cfg = &model.config;
    let r = prep.region_index(region)?;
    let days = prep.len_days();
    if days < cfg.input_len {
        return Err(ForecastError::TooShort {
            region: region.to_string(),
            minimum: cfg.input_len,
            actual: days,
        });
    }
    let (input, anchor) = prep.normalized_input(r, days, cfg.input_len);
    let last = prep.date(days - 1);
    let dates: Vec<NaiveDate> = (1..=cfg.horizon as i64).map(|i| last + Duration::days(i)).collect();
    let dows: Vec<usize> = dates.iter().map(|d| day_of_week(*d)).collect();
    let out = model.infer(&input, &dows)?;
    let mut rows = vec![Vec::with_capacity(cfg.horizon); 3];
    for step in 0..cfg.horizon {
        let mut col: Vec<f64> = (0..3).map(|q| out.get2(q, step)).collect();
        col.sort_by(f64::total_cmp);
        for (row, z) in rows.iter_mut().zip(col) {
            row.push(z);
        }
    }
    let mut rescaled = rows.iter().map(|z| rescale(z, anchor));
    Ok(ForecastResult {
        region: region.to_string(),
        dates,
        q05: rescaled.next().unwrap(),
        q50: rescaled.next().unwrap(),
        q90: rescaled.next().unwrap(),
    })
}

pub fn predict_all(model: &ForecastModel, prep: &PreparedPanel) -> Result<Vec<ForecastResult>, ForecastError> {
    prep.regions.iter().map(|r| predict(model, prep, r)).collect()
}

/// `region_id,date,q05,q50,q90`
pub fn forecasts_to_csv(results: &[ForecastResult]) -> String {
    let mut out = String::from("region_id,date,q05,q50,q90\n");
    for r in results {
        for i in 0..r.dates.len() {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.region, r.dates[i], r.q05[i], r.q50[i], r.q90[i]
            ));
        }
    }
    out
}

#[derive(Deserialize)]
struct ForecastRow {
    region_id: String,
    date: String,
    q05: f64,
    q50: f64,
    q90: f64,
}

/// Parses the forecast CSV, grouping rows by region in file order.
pub fn read_forecasts_csv(reader: impl Read) -> Result<Vec<ForecastResult>, ForecastError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out: Vec<ForecastResult> = Vec::new();
    for (i, rec) in rdr.deserialize::<ForecastRow>().enumerate() {
        let rec = rec.map_err(|e| ForecastError::Csv(format!("row {}: {e}", i + 2)))?;
        let date = NaiveDate::parse_from_str(&rec.date, "%Y-%m-%d")
            .map_err(|_| ForecastError::Csv(format!("row {}: bad date `{}`", i + 2, rec.date)))?;
        let idx = match out.iter().position(|r| r.region == rec.region_id) {
            Some(idx) => idx,
            None => {
                out.push(ForecastResult {
                    region: rec.region_id.clone(),
                    dates: Vec::new(),
                    q05: Vec::new(),
                    q50: Vec::new(),
                    q90: Vec::new(),
                });
                out.len() - 1
            }
        };
        let r = &mut out[idx];
        r.dates.push(date);
        r.q05.push(rec.q05);
        r.q50.push(rec.q50);
        r.q90.push(rec.q90);
    }
    Ok(out)
}
