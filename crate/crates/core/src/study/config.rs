use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::StudyError;
use crate::dataset::{FeatureSet, LabelColumns, ReleaseSpec};
use crate::explain::ShapRows;
use crate::stats::{AutoSpearmanConfig, SkConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub rho_max: f64,
    pub vif_max: f64,
    /// Cumulative explained variance the kept components must reach.
    pub pca_variance: f64,
    pub sk_alpha: f64,
    pub sk_min_delta: f64,
    pub k_min: usize,
    pub k_max: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            rho_max: 0.7,
            vif_max: 5.0,
            pca_variance: 0.90,
            sk_alpha: 0.05,
            sk_min_delta: 0.147,
            k_min: 2,
            k_max: 40,
        }
    }
}

impl Thresholds {
    pub fn sk(&self) -> SkConfig {
        SkConfig { alpha: self.sk_alpha, min_delta: self.sk_min_delta }
    }

    pub fn auto_spearman(&self) -> AutoSpearmanConfig {
        AutoSpearmanConfig { rho_max: self.rho_max, vif_max: self.vif_max }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractOptions {
    pub label_path_column: String,
    pub label_defect_column: String,
    /// Metric columns present in a label file replace computed values.
    pub use_published_metrics: bool,
    /// Count unresolved names that match an API by simple name.
    pub favor_recall: bool,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        let l = LabelColumns::default();
        ExtractOptions {
            label_path_column: l.path,
            label_defect_column: l.defect,
            use_published_metrics: false,
            favor_recall: true,
        }
    }
}

impl ExtractOptions {
    pub fn label_columns(&self) -> LabelColumns {
        LabelColumns { path: self.label_path_column.clone(), defect: self.label_defect_column.clone() }
    }
}

/// Where classifier settings are tuned.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// One search on the whole release table; every round reuses the winner.
    #[default]
    PerRelease,
    /// A fresh search on each round's in-bag sample.
    PerBootstrap,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyOptions {
    pub shap_rows: ShapRows,
    /// Explain at most this many rows per bootstrap (an even-stride sample).
    pub shap_max_rows: Option<usize>,
    pub grid_search: GridMode,
}

pub const MODEL_KUCLS: &str = "KUCLS";
pub const MODEL_CC_PROD: &str = "CC_PROD";
pub const MODEL_CC: &str = "CC";
pub const MODEL_COMBINED: &str = "KUCLS+CC";
pub const MODEL_COST_EFF: &str = "KUCLS_CC_COST_EFF";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub extract: ExtractOptions,
    #[serde(default)]
    pub study: StudyOptions,
    /// Column lists replacing the built-in model feature sets.
    #[serde(default)]
    pub feature_sets: BTreeMap<String, Vec<String>>,
    #[serde(default, rename = "release")]
    pub releases: Vec<ReleaseSpec>,
}

fn default_output() -> PathBuf {
    PathBuf::from("kunits-out")
}

fn absolute(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

impl StudyConfig {
    /// Parses TOML; relative paths are taken from the file's directory.
    pub fn from_toml(text: &str, base: &Path) -> Result<StudyConfig, StudyError> {
        let mut cfg: StudyConfig = toml::from_str(text).map_err(|e| StudyError::Config(e.to_string()))?;
        cfg.output_dir = absolute(base, &cfg.output_dir);
        for r in &mut cfg.releases {
            r.source_root = absolute(base, &r.source_root);
            r.label_file = absolute(base, &r.label_file);
            r.repository = r.repository.as_ref().map(|p| absolute(base, p));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<StudyConfig, StudyError> {
        let text = std::fs::read_to_string(path).map_err(|e| StudyError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        StudyConfig::from_toml(&text, &base)
    }

    fn validate(&self) -> Result<(), StudyError> {
        let t = &self.thresholds;
        let bad = |m: &str| Err(StudyError::Config(m.to_string()));
        if !(0.0 < t.pca_variance && t.pca_variance <= 1.0) {
            return bad("pca_variance must be in (0, 1]");
        }
        if t.k_min < 2 || t.k_max < t.k_min {
            return bad("need 2 <= k_min <= k_max");
        }
        if !(0.0 < t.rho_max && t.rho_max <= 1.0) || t.vif_max <= 1.0 {
            return bad("rho_max must be in (0, 1] and vif_max above 1");
        }
        let mut ids = std::collections::BTreeSet::new();
        for r in &self.releases {
            if !ids.insert(r.release_id()) {
                return Err(StudyError::Config(format!("release {} listed twice", r.release_id())));
            }
        }
        Ok(())
    }

    /// Columns of a model, honouring overrides.
    pub fn model_columns(&self, model: &str) -> Result<Vec<String>, StudyError> {
        if let Some(c) = self.feature_sets.get(model) {
            return Ok(c.clone());
        }
        let set = match model {
            MODEL_KUCLS => FeatureSet::Ku,
            MODEL_CC_PROD => FeatureSet::Prod,
            MODEL_CC => FeatureSet::ProdProc,
            MODEL_COMBINED => FeatureSet::KuCc,
            MODEL_COST_EFF => FeatureSet::CostEff10,
            other => return Err(StudyError::Config(format!("unknown model {other}"))),
        };
        Ok(set.columns())
    }

    /// Hex digest of the configuration, output directory excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Directory holding every output of this configuration.
    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(format!("run-{}", &self.hash()[..12]))
    }

    pub fn release(&self, id: &str) -> Option<&ReleaseSpec> {
        self.releases.iter().find(|r| r.release_id() == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
seed = 7

[[release]]
project = "demo"
release_tag = "1.0"
source_root = "src"
label_file = "labels.csv"
"#;

    #[test]
    fn defaults_and_relative_paths() {
        let c = StudyConfig::from_toml(MINIMAL, Path::new("/cfg")).unwrap();
        assert_eq!(c.thresholds, Thresholds::default());
        assert_eq!(c.releases[0].source_root, PathBuf::from("/cfg/src"));
        assert_eq!(c.output_dir, PathBuf::from("/cfg/kunits-out"));
        assert_eq!(c.model_columns(MODEL_COST_EFF).unwrap().len(), 10);
        assert_eq!(c.model_columns(MODEL_COMBINED).unwrap().len(), 87);
    }

    #[test]
    fn seed_is_required_and_thresholds_checked() {
        assert!(StudyConfig::from_toml("[thresholds]\nrho_max = 0.7\n", Path::new("/")).is_err());
        let bad = format!("{MINIMAL}\n[thresholds]\npca_variance = 1.5\n");
        assert!(matches!(StudyConfig::from_toml(&bad, Path::new("/")), Err(StudyError::Config(_))));
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = StudyConfig::from_toml(MINIMAL, Path::new("/a")).unwrap();
        let mut b = a.clone();
        b.output_dir = PathBuf::from("/elsewhere");
        assert_eq!(a.hash(), b.hash());
        let mut c = a.clone();
        c.seed = 8;
        assert_ne!(a.hash(), c.hash());
    }
}
