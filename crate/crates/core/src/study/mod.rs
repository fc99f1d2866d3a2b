//! The full experiment as reproducible steps over a config file: extract
//! tables, run the preliminary clustering study, evaluate the models, explain
//! single files, and summarize.
//!
//! Every output lands under `<output_dir>/run-<hash>/`, where the hash covers
//! the whole configuration except the output directory. Reruns overwrite the
//! same files with the same bytes.

mod config;
mod extract;
mod prelim;
mod report;
mod rq;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::{full_schema, import_csv, DatasetError, FeatureTable};

pub use config::{
    ExtractOptions, GridMode, StudyConfig, StudyOptions, Thresholds, MODEL_CC, MODEL_CC_PROD, MODEL_COMBINED,
    MODEL_COST_EFF, MODEL_KUCLS,
};
pub use extract::{extract_release, run_extract, ExtractOutcome};
pub use prelim::{
    ku_metric_correlations, prelim_release, run_prelim, CorrelationSummary, PrelimReport, ReleasePrelim, SpaceClusters,
};
pub use report::{run_report, Report};
pub use rq::{comparison_rows, explain_file, run_study, ComparisonRow, ExplainOutcome, Rq, RqSummary};

#[derive(Debug, thiserror::Error)]
pub enum StudyError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Missing(String),
    #[error("no usable row for {path} in release {release}")]
    UnknownPath { release: String, path: String },
    #[error("no persisted {model} model for release {release}; run the study first")]
    ModelMissing { release: String, model: String },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Learn(#[from] crate::learner::LearnError),
    #[error(transparent)]
    Stats(#[from] crate::stats::StatsError),
    #[error(transparent)]
    Explain(#[from] crate::explain::ExplainError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// A release that could not be processed; the others still were.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseFailure {
    pub release: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub ku_ruleset: String,
    pub releases: Vec<String>,
}

impl Manifest {
    pub fn of(cfg: &StudyConfig) -> Manifest {
        Manifest {
            config_hash: cfg.hash(),
            seed: cfg.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            ku_ruleset: crate::ku::RULESET_VERSION.to_string(),
            releases: cfg.releases.iter().map(|r| r.release_id()).collect(),
        }
    }
}

/// Creates the run directory and writes its manifest.
pub fn prepare_run_dir(cfg: &StudyConfig) -> Result<PathBuf, StudyError> {
    let dir = cfg.run_dir();
    std::fs::create_dir_all(&dir)?;
    write_json(&dir.join("manifest.json"), &Manifest::of(cfg))?;
    Ok(dir)
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), StudyError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub(crate) fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, StudyError> {
    let text = std::fs::read_to_string(path).map_err(|e| StudyError::Missing(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

/// Seed of one release, derived from the master seed and the release id.
pub fn release_seed(master: u64, release_id: &str) -> u64 {
    let d = Sha256::digest(release_id.as_bytes());
    master ^ u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

pub fn table_path(run_dir: &Path, release_id: &str) -> PathBuf {
    run_dir.join("tables").join(format!("{release_id}.csv"))
}

/// The extracted table of every configured release, in config order. A
/// release without a table is reported as a failure.
pub fn load_tables(cfg: &StudyConfig) -> (Vec<(String, FeatureTable)>, Vec<ReleaseFailure>) {
    let dir = cfg.run_dir();
    let schema = full_schema();
    let mut tables = Vec::new();
    let mut failures = Vec::new();
    for r in &cfg.releases {
        let id = r.release_id();
        let path = table_path(&dir, &id);
        if !path.exists() {
            failures
                .push(ReleaseFailure { release: id, error: format!("no table at {}; run extract", path.display()) });
            continue;
        }
        match import_csv(&path, Some(&schema)) {
            Ok(t) => tables.push((id, t)),
            Err(e) => failures.push(ReleaseFailure { release: id, error: e.to_string() }),
        }
    }
    (tables, failures)
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}
