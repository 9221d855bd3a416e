//! SMAPE and the holdout backtest: train on data up to a cutoff, forecast
//! the following week, score every model on every region and day.

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::forecast::{
    ar_ols, build_model, predict_all, seasonal_naive, train, ForecastError, NetConfig,
};
use crate::series::{prepare, CasePanel, SeriesError};

pub const SMAPE_DEFINITION: &str =
    "smape = mean over the horizon of 2*|forecast - actual| / (|actual| + |forecast|); a 0/0 term counts as 0; range [0, 2]";

pub const AR_ORDER: usize = 7;
pub const AR_DIFFERENCES: usize = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("smape needs equal non-empty inputs, got {actual} actual and {forecast} forecast values")]
    Length { actual: usize, forecast: usize },
    #[error("holdout after {cutoff} has {available} days, need {needed}")]
    Holdout {
        cutoff: NaiveDate,
        needed: usize,
        available: usize,
    },
    #[error("model `{model}` returned {actual} forecasts for {expected} regions")]
    ModelOutput {
        model: String,
        expected: usize,
        actual: usize,
    },
}

/// One SMAPE term; both values zero scores 0.
pub fn smape_term(actual: f64, forecast: f64) -> f64 {
    let denom = actual.abs() + forecast.abs();
    if denom == 0.0 {
        0.0
    } else {
        2.0 * (forecast - actual).abs() / denom
    }
}

pub fn smape(actual: &[f64], forecast: &[f64]) -> Result<f64, EvalError> {
    if actual.len() != forecast.len() || actual.is_empty() {
        return Err(EvalError::Length {
            actual: actual.len(),
            forecast: forecast.len(),
        });
    }
    let total: f64 = actual.iter().zip(forecast).map(|(&a, &f)| smape_term(a, f)).sum();
    Ok(total / actual.len() as f64)
}

/// A forecaster that can be refit on a truncated panel.
pub trait BacktestModel {
    fn name(&self) -> String;

    /// `horizon` point forecasts per region, in the panel's region order.
    fn forecast(&self, train: &CasePanel, horizon: usize) -> Result<Vec<Vec<f64>>, EvalError>;
}

/// The net, trained from scratch on the given panel; q50 is the point forecast.
#[derive(Debug, Clone)]
pub struct NetModel {
    pub config: NetConfig,
}

impl NetModel {
    pub fn new(config: NetConfig, use_day_embeddings: bool) -> Self {
        Self {
            config: NetConfig {
                use_day_embeddings,
                ..config
            },
        }
    }
}

impl BacktestModel for NetModel {
    fn name(&self) -> String {
        if self.config.use_day_embeddings {
            "net".into()
        } else {
            "net_no_dow".into()
        }
    }

    fn forecast(&self, panel: &CasePanel, horizon: usize) -> Result<Vec<Vec<f64>>, EvalError> {
        let config = NetConfig {
            horizon,
            ..self.config.clone()
        };
        let prep = prepare(panel, config.alpha)?;
        let mut model = build_model(&config, config.seed)?;
        train(&mut model, &prep, &config)?;
        Ok(predict_all(&model, &prep)?.into_iter().map(|r| r.q50).collect())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SeasonalNaive;

impl BacktestModel for SeasonalNaive {
    fn name(&self) -> String {
        "seasonal_naive".into()
    }

    fn forecast(&self, panel: &CasePanel, horizon: usize) -> Result<Vec<Vec<f64>>, EvalError> {
        panel
            .regions()
            .iter()
            .map(|r| Ok(seasonal_naive(panel, r, horizon)?))
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ArOls {
    pub p: usize,
    pub d: usize,
}

impl Default for ArOls {
    fn default() -> Self {
        Self {
            p: AR_ORDER,
            d: AR_DIFFERENCES,
        }
    }
}

impl BacktestModel for ArOls {
    fn name(&self) -> String {
        "ar_ols".into()
    }

    fn forecast(&self, panel: &CasePanel, horizon: usize) -> Result<Vec<Vec<f64>>, EvalError> {
        panel
            .regions()
            .iter()
            .map(|r| {
                let f = ar_ols(panel, r, self.p, self.d, horizon)?;
                if f.fell_back {
                    eprintln!("warning: AR fit for `{r}` is singular, using seasonal naive");
                }
                Ok(f.values)
            })
            .collect()
    }
}

/// Model names accepted in configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Net,
    NetNoDow,
    SeasonalNaive,
    ArOls,
}

impl ModelKind {
    pub fn build(self, net: &NetConfig) -> Box<dyn BacktestModel> {
        match self {
            ModelKind::Net => Box::new(NetModel::new(net.clone(), true)),
            ModelKind::NetNoDow => Box::new(NetModel::new(net.clone(), false)),
            ModelKind::SeasonalNaive => Box::new(SeasonalNaive),
            ModelKind::ArOls => Box::new(ArOls::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmapeCell {
    pub model: String,
    pub region: String,
    pub date: String,
    pub actual: f64,
    pub forecast: f64,
    pub smape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelScore {
    pub model: String,
    pub average_smape: f64,
    /// Average over the configured largest regions; absent when none are set.
    pub largest_regions_smape: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BacktestReport {
    pub smape_definition: String,
    pub cutoff: String,
    pub horizon: usize,
    pub largest_regions: Vec<String>,
    pub models: Vec<ModelScore>,
    pub cells: Vec<SmapeCell>,
}

impl BacktestReport {
    pub fn score(&self, model: &str) -> Option<&ModelScore> {
        self.models.iter().find(|m| m.model == model)
    }

    /// `model,region_id,date,actual,forecast,smape`
    pub fn cells_csv(&self) -> String {
        let mut out = String::from("model,region_id,date,actual,forecast,smape\n");
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                c.model, c.region, c.date, c.actual, c.forecast, c.smape
            ));
        }
        out
    }
}

/// The `n` regions with the most total cases, ties broken by region order.
pub fn largest_by_cases(panel: &CasePanel, n: usize) -> Vec<String> {
    let mut totals: Vec<(usize, u64)> = panel
        .counts()
        .iter()
        .map(|c| c.iter().sum())
        .enumerate()
        .collect();
    totals.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    totals
        .into_iter()
        .take(n)
        .map(|(i, _)| panel.regions()[i].clone())
        .collect()
}

/// Fits every model on the panel truncated at `cutoff` and scores the
/// `horizon` days that follow.
pub fn backtest(
    panel: &CasePanel,
    cutoff: NaiveDate,
    horizon: usize,
    models: &[Box<dyn BacktestModel>],
    largest_regions: &[String],
) -> Result<BacktestReport, EvalError> {
    let training = panel.truncate(cutoff)?;
    let available = (panel.last_date() - cutoff).num_days().max(0) as usize;
    if available < horizon || horizon == 0 {
        return Err(EvalError::Holdout {
            cutoff,
            needed: horizon.max(1),
            available,
        });
    }
    for r in largest_regions {
        panel.region_index(r)?;
    }
    let first = training.len_days();
    let dates: Vec<NaiveDate> = (1..=horizon as i64).map(|i| cutoff + Duration::days(i)).collect();

    let mut cells = Vec::new();
    let mut models_out = Vec::new();
    for model in models {
        let name = model.name();
        let forecasts = model.forecast(&training, horizon)?;
        if forecasts.len() != panel.regions().len() {
            return Err(EvalError::ModelOutput {
                model: name,
                expected: panel.regions().len(),
                actual: forecasts.len(),
            });
        }
        let (mut all, mut big) = (Vec::new(), Vec::new());
        for ((region, series), forecast) in panel.regions().iter().zip(panel.counts()).zip(&forecasts) {
            let actual: Vec<f64> = series[first..first + horizon].iter().map(|&c| c as f64).collect();
            if forecast.len() != horizon {
                return Err(EvalError::Length {
                    actual: horizon,
                    forecast: forecast.len(),
                });
            }
            for ((date, &a), &f) in dates.iter().zip(&actual).zip(forecast) {
                let s = smape_term(a, f);
                all.push(s);
                if largest_regions.contains(region) {
                    big.push(s);
                }
                cells.push(SmapeCell {
                    model: name.clone(),
                    region: region.clone(),
                    date: date.to_string(),
                    actual: a,
                    forecast: f,
                    smape: s,
                });
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        models_out.push(ModelScore {
            model: name,
            average_smape: mean(&all),
            largest_regions_smape: (!big.is_empty()).then(|| mean(&big)),
        });
    }
    Ok(BacktestReport {
        smape_definition: SMAPE_DEFINITION.into(),
        cutoff: cutoff.to_string(),
        horizon,
        largest_regions: largest_regions.to_vec(),
        models: models_out,
        cells,
    })
}
