//! Region vectors (static profile plus forecast mean), standardisation and
//! the dimensionality reductions applied before clustering.

mod autoencoder;
mod ga;
mod pca;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::Read;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterError;
use crate::forecast::ForecastResult;
use crate::nn::{NnError, Tensor};

pub use autoencoder::{ae_reduce, AeConfig, AeVariant, Autoencoder};
pub use ga::{ga_fitness, ga_search, ga_select, GaOutcome, GaParams};
pub use pca::{pca_fit, pca_reduce, PcaFit};

/// Static variables, in column order.
pub const STATIC_COLUMNS: [&str; 25] = [
    "altitude",
    "precipitation",
    "temperature",
    "humidity",
    "population_under_15",
    "population_15_to_24",
    "population_over_65",
    "population_density",
    "women_population",
    "multidimensional_poverty_index",
    "child_labour",
    "dependency_ratio",
    "informal_economy",
    "illiteracy",
    "school_dropout",
    "total_population",
    "life_expectancy",
    "deaths_digestive_diseases",
    "deaths_respiratory_illness",
    "deaths_cardiac_complications",
    "population_with_diabetes",
    "deaths_chronic_diseases",
    "deaths_acute_diseases",
    "deaths_endocrine_disorders",
    "deaths_malignant_neoplasm",
];

pub const FORECAST_COLUMN: &str = "forecast_mean";
pub const VECTOR_DIM: usize = STATIC_COLUMNS.len() + 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmbedError {
    #[error("static csv: missing column `{0}`")]
    MissingColumn(String),
    #[error("static csv row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("static csv: {0}")]
    Csv(String),
    #[error("region `{0}` has no forecast")]
    MissingForecast(String),
    #[error("forecast region `{0}` missing from static variables")]
    MissingStatic(String),
    #[error("need at least {minimum} rows, got {actual}")]
    TooFewRows { minimum: usize, actual: usize },
    #[error("variance threshold {0} outside (0, 1]")]
    Threshold(f64),
    #[error("invalid parameter: {0}")]
    Invalid(String),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Nn(#[from] NnError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionVector {
    pub region: String,
    /// Static columns in [`STATIC_COLUMNS`] order, then the forecast mean.
    pub values: Vec<f64>,
}

/// Static variables per region, in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticTable {
    pub regions: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl StaticTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("region_id");
        for c in STATIC_COLUMNS {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (r, vals) in self.regions.iter().zip(&self.values) {
            out.push_str(r);
            for v in vals {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

pub fn load_static(reader: impl Read) -> Result<StaticTable, EmbedError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| EmbedError::Csv(e.to_string()))?.clone();
    let position = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| EmbedError::MissingColumn(name.to_string()))
    };
    let id_col = position("region_id")?;
    let cols = STATIC_COLUMNS.iter().map(|c| position(c)).collect::<Result<Vec<_>, _>>()?;
    let mut regions = Vec::new();
    let mut values = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, rec) in rdr.records().enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| EmbedError::Row {
            row,
            message: e.to_string(),
        })?;
        let id = rec.get(id_col).unwrap_or("").to_string();
        if id.is_empty() || !seen.insert(id.clone()) {
            return Err(EmbedError::Row {
                row,
                message: format!("empty or duplicate region_id `{id}`"),
            });
        }
        let vals = cols
            .iter()
            .zip(STATIC_COLUMNS)
            .map(|(&c, name)| {
                let raw = rec.get(c).unwrap_or("");
                raw.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| EmbedError::Row {
                        row,
                        message: format!("column `{name}` has non-numeric value `{raw}`"),
                    })
            })
            .collect::<Result<Vec<_>, _>>()?;
        regions.push(id);
        values.push(vals);
    }
    Ok(StaticTable { regions, values })
}

/// Appends the mean q50 forecast to each region's static variables.
pub fn assemble(table: &StaticTable, forecasts: &[ForecastResult]) -> Result<Vec<RegionVector>, EmbedError> {
    let by_region: HashMap<&str, &ForecastResult> =
        forecasts.iter().map(|f| (f.region.as_str(), f)).collect();
    if let Some(f) = forecasts.iter().find(|f| !table.regions.contains(&f.region)) {
        return Err(EmbedError::MissingStatic(f.region.clone()));
    }
    table
        .regions
        .iter()
        .zip(&table.values)
        .map(|(region, vals)| {
            let f = by_region
                .get(region.as_str())
                .ok_or_else(|| EmbedError::MissingForecast(region.clone()))?;
            let mut values = vals.clone();
            values.push(f.mean_q50());
            Ok(RegionVector {
                region: region.clone(),
                values,
            })
        })
        .collect()
}

pub fn vectors_to_matrix(vectors: &[RegionVector]) -> DMatrix<f64> {
    let cols = vectors.first().map_or(0, |v| v.values.len());
    DMatrix::from_fn(vectors.len(), cols, |r, c| vectors[r].values[c])
}

#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedMatrix {
    pub matrix: DMatrix<f64>,
    pub mean: Vec<f64>,
    /// Population standard deviation of each input column.
    pub std: Vec<f64>,
    /// Columns with zero variance, left at zero.
    pub constant: Vec<bool>,
}

/// Column-wise z-score with the population standard deviation.
pub fn zscore(matrix: &DMatrix<f64>) -> StandardizedMatrix {
    let (n, m) = matrix.shape();
    let mut out = matrix.clone();
    let mut mean = vec![0.0; m];
    let mut std = vec![0.0; m];
    let mut constant = vec![false; m];
    for c in 0..m {
        let col = matrix.column(c);
        let mu = col.sum() / n.max(1) as f64;
        let var = col.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n.max(1) as f64;
        let sd = var.sqrt();
        mean[c] = mu;
        std[c] = sd;
        // relative guard so columns of identical large values count as constant
        constant[c] = sd <= 1e-12 * (1.0 + mu.abs());
        for r in 0..n {
            out[(r, c)] = if constant[c] { 0.0 } else { (matrix[(r, c)] - mu) / sd };
        }
    }
    StandardizedMatrix {
        matrix: out,
        mean,
        std,
        constant,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionMethod {
    None,
    Pca,
    Ga,
    AeStacked,
    AeTied,
}

impl ReductionMethod {
    pub const ALL: [ReductionMethod; 5] = [
        ReductionMethod::None,
        ReductionMethod::Pca,
        ReductionMethod::Ga,
        ReductionMethod::AeStacked,
        ReductionMethod::AeTied,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReductionMethod::None => "none",
            ReductionMethod::Pca => "pca",
            ReductionMethod::Ga => "ga",
            ReductionMethod::AeStacked => "ae_stacked",
            ReductionMethod::AeTied => "ae_tied",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

impl fmt::Display for ReductionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReductionMeta {
    None,
    Pca { explained_variance_ratio: Vec<f64>, components: usize },
    Ga { mask: Vec<bool>, fitness: f64, trace: Vec<f64> },
    Autoencoder { reconstruction_loss: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionResult {
    pub method: ReductionMethod,
    /// `[N x m]`, rows in region order.
    pub matrix: DMatrix<f64>,
    pub meta: ReductionMeta,
}

impl ReductionResult {
    pub fn identity(matrix: &DMatrix<f64>) -> Self {
        Self {
            method: ReductionMethod::None,
            matrix: matrix.clone(),
            meta: ReductionMeta::None,
        }
    }
}

/// `region_id,dim_0,..,dim_{m-1}`
pub fn embeddings_to_csv(regions: &[String], matrix: &DMatrix<f64>) -> String {
    let mut out = String::from("region_id");
    for c in 0..matrix.ncols() {
        out.push_str(&format!(",dim_{c}"));
    }
    out.push('\n');
    for (r, region) in regions.iter().enumerate() {
        out.push_str(region);
        for c in 0..matrix.ncols() {
            out.push_str(&format!(",{}", matrix[(r, c)]));
        }
        out.push('\n');
    }
    out
}

pub fn read_embeddings_csv(reader: impl Read) -> Result<(Vec<String>, DMatrix<f64>), EmbedError> {
    let mut rdr = csv::Reader::from_reader(reader);
    let headers = rdr.headers().map_err(|e| EmbedError::Csv(e.to_string()))?.clone();
    if headers.get(0) != Some("region_id") || headers.len() < 2 {
        return Err(EmbedError::MissingColumn("region_id".into()));
    }
    let dims = headers.len() - 1;
    let mut regions = Vec::new();
    let mut data = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| EmbedError::Row {
            row: i + 2,
            message: e.to_string(),
        })?;
        regions.push(rec[0].to_string());
        for c in 1..=dims {
            data.push(rec[c].parse::<f64>().map_err(|_| EmbedError::Row {
                row: i + 2,
                message: format!("bad number `{}`", &rec[c]),
            })?);
        }
    }
    Ok((regions.clone(), DMatrix::from_row_slice(regions.len(), dims, &data)))
}

pub(crate) fn to_tensor(m: &DMatrix<f64>) -> Tensor {
    let (r, c) = m.shape();
    let data = (0..r).flat_map(|i| (0..c).map(move |j| (i, j))).map(|ij| m[ij]).collect();
    Tensor::matrix(r, c, data).expect("shape matches data")
}

pub(crate) fn from_tensor(t: &Tensor) -> DMatrix<f64> {
    DMatrix::from_row_slice(t.rows(), t.cols(), t.data())
}

/// Keeps the columns selected by `mask`.
pub fn select_columns(m: &DMatrix<f64>, mask: &[bool]) -> DMatrix<f64> {
    let cols: Vec<usize> = mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
    DMatrix::from_fn(m.nrows(), cols.len(), |r, c| m[(r, cols[c])])
}
