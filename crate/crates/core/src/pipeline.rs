//! File-based stages: synth, forecast, embed, cluster, evaluate.
//!
//! Every stage reads its inputs from disk and writes its artifacts to the
//! output directory, then refreshes `report.json` and `manifest.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cluster::{clusters_to_csv, select_best, KMeansOptions};
use crate::embed::{
    ae_reduce, assemble, embeddings_to_csv, ga_select, load_static, pca_reduce, read_embeddings_csv,
    vectors_to_matrix, zscore, AeConfig, AeVariant, GaParams, ReductionMeta, ReductionMethod, ReductionResult,
};
use crate::eval::{backtest, largest_by_cases, ModelKind};
use crate::forecast::{build_model, forecasts_to_csv, predict_all, read_forecasts_csv, train, NetConfig};
use crate::series::{load_cases, prepare, CasePanel};
use crate::synth::{self, SynthConfig};

pub const FORECASTS: &str = "forecasts.csv";
pub const EMBEDDINGS: &str = "embeddings.csv";
pub const CLUSTERS: &str = "clusters.csv";
pub const GRID: &str = "silhouette_grid.csv";
pub const REPORT: &str = "report.json";
pub const MANIFEST: &str = "manifest.json";
pub const BACKTEST_CELLS: &str = "backtest_cells.csv";
pub const PLANTED_GROUPS: &str = "planted_groups.csv";

const STAGES: [&str; 4] = ["forecast", "embed", "cluster", "backtest"];
const DEFAULT_LARGEST: usize = 4;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("missing input file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}: {message}", path.display())]
    Input { path: PathBuf, message: String },
    #[error("{0}")]
    Runtime(String),
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
}

impl PipelineError {
    /// 1 for bad configs or inputs, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) | PipelineError::MissingFile(_) | PipelineError::Input { .. } => 1,
            PipelineError::Runtime(_) | PipelineError::Io { .. } => 2,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Runtime(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSettings {
    pub regions: usize,
    pub days: usize,
    pub start: String,
    pub noise: f64,
    pub static_noise: f64,
}

impl Default for SynthSettings {
    fn default() -> Self {
        let d = SynthConfig::default();
        Self {
            regions: d.regions,
            days: d.days,
            start: d.start.to_string(),
            noise: d.noise,
            static_noise: d.static_noise,
        }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_k_range() -> [usize; 2] {
    [3, 10]
}

fn default_reductions() -> Vec<ReductionMethod> {
    ReductionMethod::ALL.to_vec()
}

fn default_pca_threshold() -> f64 {
    0.9
}

fn default_models() -> Vec<ModelKind> {
    vec![ModelKind::Net, ModelKind::NetNoDow, ModelKind::SeasonalNaive, ModelKind::ArOls]
}

/// One JSON document describing a run. Relative paths resolve against the
/// directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Seeds every random component; the sub-configs' own seeds must stay 0.
    pub seed: u64,
    pub cases: PathBuf,
    pub static_vars: PathBuf,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub net: NetConfig,
    #[serde(default)]
    pub ga: GaParams,
    #[serde(default)]
    pub autoencoder: AeConfig,
    #[serde(default)]
    pub kmeans: KMeansOptions,
    /// Inclusive `[k_min, k_max]`.
    #[serde(default = "default_k_range")]
    pub k_range: [usize; 2],
    #[serde(default = "default_reductions")]
    pub reductions: Vec<ReductionMethod>,
    #[serde(default = "default_pca_threshold")]
    pub pca_threshold: f64,
    #[serde(default = "default_models")]
    pub models: Vec<ModelKind>,
    /// Last training day of the backtest; defaults to one horizon before the end.
    #[serde(default)]
    pub cutoff: Option<String>,
    /// Regions for the subset average; defaults to the four with most cases.
    #[serde(default)]
    pub largest_regions: Vec<String>,
    #[serde(default)]
    pub synth: SynthSettings,
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = read_input(path)?;
        let mut cfg = Self::from_json(&text).map_err(|e| match e {
            PipelineError::Config(m) => PipelineError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.cases, &mut cfg.static_vars, &mut cfg.out_dir] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if self.net.seed != 0 || self.ga.seed != 0 || self.autoencoder.seed != 0 {
            return bad("net.seed, ga.seed and autoencoder.seed are derived from `seed`; leave them unset".into());
        }
        self.net.validate().map_err(|e| PipelineError::Config(format!("net: {e}")))?;
        let [lo, hi] = self.k_range;
        if lo < 2 || lo > hi {
            return bad(format!("k_range [{lo}, {hi}] must satisfy 2 <= k_min <= k_max"));
        }
        if self.reductions.is_empty() {
            return bad("reductions: at least one reduction is required".into());
        }
        if !(self.pca_threshold > 0.0 && self.pca_threshold <= 1.0) {
            return bad(format!("pca_threshold {} must be in (0, 1]", self.pca_threshold));
        }
        self.cutoff_date()?;
        self.synth_config()?;
        Ok(())
    }

    pub fn k_values(&self) -> Vec<usize> {
        (self.k_range[0]..=self.k_range[1]).collect()
    }

    pub fn cutoff_date(&self) -> Result<Option<NaiveDate>, PipelineError> {
        self.cutoff
            .as_deref()
            .map(|s| {
                NaiveDate::parse_from_str(s, "%Y-%m-%d")
                    .map_err(|_| PipelineError::Config(format!("cutoff `{s}` is not a YYYY-MM-DD date")))
            })
            .transpose()
    }

    pub fn synth_config(&self) -> Result<SynthConfig, PipelineError> {
        let s = &self.synth;
        let start = NaiveDate::parse_from_str(&s.start, "%Y-%m-%d")
            .map_err(|_| PipelineError::Config(format!("synth.start `{}` is not a YYYY-MM-DD date", s.start)))?;
        Ok(SynthConfig {
            regions: s.regions,
            days: s.days,
            start,
            seed: self.seed,
            noise: s.noise,
            static_noise: s.static_noise,
        })
    }

    fn net_config(&self) -> NetConfig {
        NetConfig {
            seed: self.seed,
            ..self.net.clone()
        }
    }

    fn ga_params(&self) -> GaParams {
        GaParams {
            seed: self.seed,
            ..self.ga.clone()
        }
    }

    fn ae_config(&self) -> AeConfig {
        AeConfig {
            seed: self.seed,
            ..self.autoencoder.clone()
        }
    }

    /// SHA-256 of the config with the output directory left out, so the
    /// same run written to two places hashes the same.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(map) = &mut value {
            map.remove("out_dir");
            for key in ["cases", "static_vars"] {
                if let Some(Value::String(p)) = map.get_mut(key) {
                    *p = Path::new(p.as_str())
                        .file_name()
                        .map(|f| f.to_string_lossy().into_owned())
                        .unwrap_or_default();
                }
            }
        }
        sha256_hex(value.to_string().as_bytes())
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn read_input(path: &Path) -> Result<String, PipelineError> {
    if !path.is_file() {
        return Err(PipelineError::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|e| PipelineError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), PipelineError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| PipelineError::Io {
            path: dir.to_path_buf(),
            message: e.to_string(),
        })?;
    }
    fs::write(path, contents).map_err(|e| PipelineError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).map_err(runtime)?;
    text.push('\n');
    write_file(path, &text)
}

fn input_error(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn load_panel(path: &Path) -> Result<CasePanel, PipelineError> {
    let text = read_input(path)?;
    let (panel, summary) = load_cases(text.as_bytes()).map_err(|e| input_error(path, e))?;
    if summary.filled_gaps > 0 {
        eprintln!(
            "warning: {}: {} missing (region, date) rows filled with 0",
            path.display(),
            summary.filled_gaps
        );
    }
    Ok(panel)
}

fn embeddings_file(method: ReductionMethod) -> String {
    format!("embeddings_{method}.csv")
}

fn stage_file(stage: &str) -> String {
    format!("{stage}.json")
}

/// Writes the synthetic cases and static-variable files named in the config,
/// plus the planted groups next to the static file.
pub fn run_synth(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let data = synth::generate(&cfg.synth_config()?).map_err(runtime)?;
    write_file(&cfg.cases, &data.cases.to_csv())?;
    write_file(&cfg.static_vars, &data.statics.to_csv())?;
    let mut groups = String::from("region_id,group\n");
    for (r, g) in data.statics.regions.iter().zip(&data.groups) {
        groups.push_str(&format!("{r},{g}\n"));
    }
    let dir = cfg.static_vars.parent().unwrap_or(Path::new(""));
    write_file(&dir.join(PLANTED_GROUPS), &groups)
}

/// Trains the net on the whole panel and forecasts the following week.
pub fn run_forecast(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let panel = load_panel(&cfg.cases)?;
    let net = cfg.net_config();
    let prep = prepare(&panel, net.alpha).map_err(|e| input_error(&cfg.cases, e))?;
    let mut model = build_model(&net, net.seed).map_err(runtime)?;
    let report = train(&mut model, &prep, &net).map_err(|e| input_error(&cfg.cases, e))?;
    let forecasts = predict_all(&model, &prep).map_err(runtime)?;
    write_file(&cfg.out_dir.join(FORECASTS), &forecasts_to_csv(&forecasts))?;
    write_json(
        &cfg.out_dir.join(stage_file("forecast")),
        &json!({
            "last_observed": panel.last_date().to_string(),
            "windows": report.windows,
            "steps": report.steps,
            "epoch_losses": report.epoch_losses,
            "parameters": model.param_count(),
        }),
    )?;
    finish(cfg)
}

fn check_k_range(cfg: &PipelineConfig, n: usize) -> Result<(), PipelineError> {
    let [lo, hi] = cfg.k_range;
    if n < 3 || hi > n - 1 {
        return Err(PipelineError::Config(format!(
            "k_range [{lo}, {hi}] must lie within [2, {}] for {n} regions",
            n.saturating_sub(1)
        )));
    }
    Ok(())
}

fn reduce(cfg: &PipelineConfig, method: ReductionMethod, x: &DMatrix<f64>) -> Result<ReductionResult, PipelineError> {
    let result = match method {
        ReductionMethod::None => Ok(ReductionResult::identity(x)),
        ReductionMethod::Pca => pca_reduce(x, cfg.pca_threshold),
        ReductionMethod::Ga => ga_select(x, &cfg.k_values(), &cfg.ga_params()),
        ReductionMethod::AeStacked => ae_reduce(x, AeVariant::Stacked, &cfg.ae_config()),
        ReductionMethod::AeTied => ae_reduce(x, AeVariant::Tied, &cfg.ae_config()),
    };
    result.map_err(runtime)
}

/// Builds and standardizes the region vectors, then applies every
/// configured reduction.
pub fn run_embed(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let static_text = read_input(&cfg.static_vars)?;
    let table = load_static(static_text.as_bytes()).map_err(|e| input_error(&cfg.static_vars, e))?;
    let forecasts_path = cfg.out_dir.join(FORECASTS);
    let forecasts = read_forecasts_csv(read_input(&forecasts_path)?.as_bytes())
        .map_err(|e| input_error(&forecasts_path, e))?;
    let vectors = assemble(&table, &forecasts).map_err(|e| input_error(&cfg.static_vars, e))?;
    check_k_range(cfg, vectors.len())?;
    let standardized = zscore(&vectors_to_matrix(&vectors));
    let regions: Vec<String> = vectors.iter().map(|v| v.region.clone()).collect();
    write_file(&cfg.out_dir.join(EMBEDDINGS), &embeddings_to_csv(&regions, &standardized.matrix))?;

    let mut summaries = Vec::new();
    for &method in &cfg.reductions {
        let result = reduce(cfg, method, &standardized.matrix)?;
        write_file(
            &cfg.out_dir.join(embeddings_file(method)),
            &embeddings_to_csv(&regions, &result.matrix),
        )?;
        summaries.push(json!({
            "reduction": method,
            "dimensions": result.matrix.ncols(),
            "meta": result.meta,
        }));
    }
    write_json(
        &cfg.out_dir.join(stage_file("embed")),
        &json!({
            "regions": regions.len(),
            "column_mean": standardized.mean,
            "column_std": standardized.std,
            "reductions": summaries,
        }),
    )?;
    finish(cfg)
}

/// Clusters every reduced embedding and keeps the highest silhouette.
pub fn run_cluster(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let mut reductions = Vec::new();
    let mut regions: Option<Vec<String>> = None;
    for &method in &cfg.reductions {
        let path = cfg.out_dir.join(embeddings_file(method));
        let (ids, matrix) = read_embeddings_csv(read_input(&path)?.as_bytes()).map_err(|e| input_error(&path, e))?;
        match &regions {
            Some(r) if *r != ids => {
                return Err(input_error(&path, "region list differs from the other embeddings"));
            }
            Some(_) => {}
            None => regions = Some(ids),
        }
        reductions.push(ReductionResult {
            method,
            matrix,
            meta: ReductionMeta::None,
        });
    }
    let regions = regions.unwrap_or_default();
    check_k_range(cfg, regions.len())?;
    let (grid, best) = select_best(&reductions, &cfg.k_values(), cfg.seed, &cfg.kmeans).map_err(runtime)?;
    write_file(&cfg.out_dir.join(CLUSTERS), &clusters_to_csv(&regions, &best.assignment.labels))?;
    write_file(&cfg.out_dir.join(GRID), &grid.to_csv())?;
    write_json(
        &cfg.out_dir.join(stage_file("cluster")),
        &json!({
            "selected": {
                "reduction": best.reduction,
                "method": best.method,
                "k": best.k,
                "silhouette": best.silhouette,
            },
            "grid": grid,
        }),
    )?;
    finish(cfg)
}

/// Backtests the configured models on the week after the cutoff.
pub fn run_evaluate(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    if cfg.models.is_empty() {
        return Err(PipelineError::Config("models: nothing to evaluate".into()));
    }
    let panel = load_panel(&cfg.cases)?;
    let horizon = cfg.net.horizon;
    let cutoff = match cfg.cutoff_date()? {
        Some(c) => c,
        None => panel.last_date() - Duration::days(horizon as i64),
    };
    let training = panel.truncate(cutoff).map_err(|e| PipelineError::Config(e.to_string()))?;
    let largest = if cfg.largest_regions.is_empty() {
        largest_by_cases(&training, DEFAULT_LARGEST)
    } else {
        cfg.largest_regions.clone()
    };
    let net = cfg.net_config();
    let models: Vec<_> = cfg.models.iter().map(|m| m.build(&net)).collect();
    let report = backtest(&panel, cutoff, horizon, &models, &largest).map_err(|e| match e {
        crate::eval::EvalError::Holdout { .. } | crate::eval::EvalError::Series(_) => {
            PipelineError::Config(e.to_string())
        }
        other => runtime(other),
    })?;
    write_file(&cfg.out_dir.join(BACKTEST_CELLS), &report.cells_csv())?;
    write_json(&cfg.out_dir.join(stage_file("backtest")), &report)?;
    finish(cfg)
}

/// Forecast, embed, cluster and, when models are configured, backtest.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    run_forecast(cfg)?;
    run_embed(cfg)?;
    run_cluster(cfg)?;
    if !cfg.models.is_empty() {
        run_evaluate(cfg)?;
    }
    Ok(())
}

/// Rebuilds `report.json` from the stage files present and rewrites the
/// manifest.
fn finish(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let mut report = BTreeMap::new();
    for stage in STAGES {
        let path = cfg.out_dir.join(stage_file(stage));
        if path.is_file() {
            let text = fs::read_to_string(&path).map_err(|e| input_error(&path, e))?;
            let value: Value = serde_json::from_str(&text).map_err(|e| input_error(&path, e))?;
            report.insert(stage, value);
        }
    }
    write_json(&cfg.out_dir.join(REPORT), &report)?;
    write_manifest(cfg)
}

fn write_manifest(cfg: &PipelineConfig) -> Result<(), PipelineError> {
    let mut artifacts = BTreeMap::new();
    let entries = fs::read_dir(&cfg.out_dir).map_err(|e| PipelineError::Io {
        path: cfg.out_dir.clone(),
        message: e.to_string(),
    })?;
    for entry in entries {
        let path = entry.map_err(runtime)?.path();
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        if !path.is_file() || name == MANIFEST {
            continue;
        }
        let bytes = fs::read(&path).map_err(|e| input_error(&path, e))?;
        artifacts.insert(name, sha256_hex(&bytes));
    }
    write_json(
        &cfg.out_dir.join(MANIFEST),
        &json!({
            "config_sha256": cfg.hash(),
            "seed": cfg.seed,
            "artifacts": artifacts,
        }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Synth,
    Forecast,
    Embed,
    Cluster,
    Pipeline,
    Evaluate,
}

/// Loads the config, applies the command-line overrides and runs one stage.
pub fn run(stage: Stage, config: &Path, seed: Option<u64>, out: Option<&Path>) -> Result<(), PipelineError> {
    let mut cfg = PipelineConfig::load(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(out) = out {
        cfg.out_dir = out.to_path_buf();
    }
    cfg.validate()?;
    match stage {
        Stage::Synth => run_synth(&cfg),
        Stage::Forecast => run_forecast(&cfg),
        Stage::Embed => run_embed(&cfg),
        Stage::Cluster => run_cluster(&cfg),
        Stage::Pipeline => run_pipeline(&cfg),
        Stage::Evaluate => run_evaluate(&cfg),
    }
}
