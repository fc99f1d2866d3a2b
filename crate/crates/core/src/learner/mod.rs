//! Defect classifiers and the out-of-sample bootstrap protocol.

mod eval;
mod models;
mod tree;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::FeatureTable;

pub use eval::{
    bootstrap_plan, compare_models, grid_search_cv, normalized_auc_improvement, out_of_sample_evaluate,
    out_of_sample_map, out_of_sample_tuned, rank_models, read_eval_json, roc_auc, write_eval_csv, write_eval_json,
    BootstrapPlan, Comparison, EvalResult, Round, Slot, BOOTSTRAP_ROUNDS,
};
pub use models::{Forest, GaussianNb, Knn, Standardizer};
pub use tree::{Criterion, Node, Tree, TreeParams};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum LearnError {
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("training data has a single class")]
    SingleClass,
    #[error("need at least {need} rows of each class, got {got}")]
    InsufficientRows { need: usize, got: usize },
    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("evaluation labels have a single class")]
    SingleClassInEval,
    #[error("baseline AUC is 1")]
    BaselinePerfect,
    #[error("no bootstrap slot is usable in both results")]
    NoPairedSlots,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "RF")]
    RandomForest,
    #[serde(rename = "DT")]
    DecisionTree,
    #[serde(rename = "KNN")]
    Knn,
    #[serde(rename = "NB")]
    GaussianNb,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] =
        [ClassifierKind::GaussianNb, ClassifierKind::Knn, ClassifierKind::DecisionTree, ClassifierKind::RandomForest];

    pub fn short_name(self) -> &'static str {
        match self {
            ClassifierKind::RandomForest => "RF",
            ClassifierKind::DecisionTree => "DT",
            ClassifierKind::Knn => "KNN",
            ClassifierKind::GaussianNb => "NB",
        }
    }

    /// Settings used when no grid search is run.
    pub fn default_params(self) -> Params {
        match self {
            ClassifierKind::RandomForest => Params::RandomForest { n_estimators: 100, max_depth: None },
            ClassifierKind::DecisionTree => {
                Params::DecisionTree { criterion: Criterion::Gini, max_depth: None, ccp_alpha: 0.0 }
            }
            ClassifierKind::Knn => Params::Knn { n_neighbors: 5 },
            ClassifierKind::GaussianNb => Params::GaussianNb { var_smoothing: 1e-9 },
        }
    }
}

impl std::str::FromStr for ClassifierKind {
    type Err = LearnError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClassifierKind::ALL
            .into_iter()
            .find(|k| k.short_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| LearnError::Invalid(format!("unknown classifier {s}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum Params {
    #[serde(rename = "RF")]
    RandomForest { n_estimators: usize, max_depth: Option<usize> },
    #[serde(rename = "DT")]
    DecisionTree { criterion: Criterion, max_depth: Option<usize>, ccp_alpha: f64 },
    #[serde(rename = "KNN")]
    Knn { n_neighbors: usize },
    #[serde(rename = "NB")]
    GaussianNb { var_smoothing: f64 },
}

impl Params {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Params::RandomForest { .. } => ClassifierKind::RandomForest,
            Params::DecisionTree { .. } => ClassifierKind::DecisionTree,
            Params::Knn { .. } => ClassifierKind::Knn,
            Params::GaussianNb { .. } => ClassifierKind::GaussianNb,
        }
    }
}

/// Candidate settings per classifier, in search order.
pub fn param_grid(kind: ClassifierKind) -> Vec<Params> {
    let depths = [None, Some(5), Some(10)];
    match kind {
        ClassifierKind::Knn => [1, 5, 9, 13, 17, 20].map(|n_neighbors| Params::Knn { n_neighbors }).to_vec(),
        ClassifierKind::GaussianNb => {
            [1e-5, 1e-9, 1e-11, 1e-15].map(|var_smoothing| Params::GaussianNb { var_smoothing }).to_vec()
        }
        ClassifierKind::DecisionTree => {
            let mut out = Vec::new();
            for criterion in [Criterion::Gini, Criterion::Entropy, Criterion::LogLoss] {
                for max_depth in depths {
                    for ccp_alpha in [0.0001, 0.001, 0.01, 0.1, 0.5] {
                        out.push(Params::DecisionTree { criterion, max_depth, ccp_alpha });
                    }
                }
            }
            out
        }
        ClassifierKind::RandomForest => {
            let mut out = Vec::new();
            for n_estimators in [10, 50, 100, 200] {
                for max_depth in depths {
                    out.push(Params::RandomForest { n_estimators, max_depth });
                }
            }
            out
        }
    }
}

/// Hex SHA-256 of the ordered feature names.
pub fn schema_fingerprint(features: &[String]) -> String {
    let mut h = Sha256::new();
    for f in features {
        h.update(f.as_bytes());
        h.update([0u8]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Feature matrix with labels and column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub features: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<u8>,
}

impl Samples {
    /// Usable rows of `table`; missing values become 0.
    pub fn from_table(table: &FeatureTable) -> Samples {
        let (x, y) = table.matrix(0.0);
        Samples { features: table.column_names().iter().map(|s| s.to_string()).collect(), x, y }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn subset(&self, rows: &[usize]) -> Samples {
        Samples {
            features: self.features.clone(),
            x: rows.iter().map(|r| self.x[*r].clone()).collect(),
            y: rows.iter().map(|r| self.y[*r]).collect(),
        }
    }

    /// The named columns, in the given order.
    pub fn select(&self, names: &[String]) -> Result<Samples, LearnError> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| self.features.iter().position(|f| f == n).ok_or_else(|| LearnError::SchemaMismatch(n.clone())))
            .collect::<Result<_, _>>()?;
        Ok(Samples {
            features: names.to_vec(),
            x: self.x.iter().map(|r| idx.iter().map(|i| r[*i]).collect()).collect(),
            y: self.y.clone(),
        })
    }

    fn class_counts(&self) -> (usize, usize) {
        let pos = self.y.iter().filter(|l| **l == 1).count();
        (self.y.len() - pos, pos)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Fitted {
    Forest(Forest),
    Tree(Tree),
    Knn(Knn),
    GaussianNb(GaussianNb),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub params: Params,
    pub features: Vec<String>,
    pub fingerprint: String,
    pub fitted: Fitted,
}

impl Model {
    pub fn kind(&self) -> ClassifierKind {
        self.params.kind()
    }

    /// The model's trees, if it is tree-based.
    pub fn trees(&self) -> Option<&[Tree]> {
        match &self.fitted {
            Fitted::Forest(f) => Some(&f.trees),
            Fitted::Tree(t) => Some(std::slice::from_ref(t)),
            _ => None,
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        match &self.fitted {
            Fitted::Forest(f) => f.predict_row(row),
            Fitted::Tree(t) => t.predict_row(row),
            Fitted::Knn(k) => k.predict_row(row),
            Fitted::GaussianNb(g) => g.predict_row(row),
        }
    }
}

/// Fits a classifier. Tree models and naive Bayes need two rows of each
/// class; KNN needs at least `n_neighbors` rows.
pub fn train(samples: &Samples, params: Params, seed: u64) -> Result<Model, LearnError> {
    let (neg, pos) = samples.class_counts();
    if neg == 0 || pos == 0 {
        return Err(LearnError::SingleClass);
    }
    let fitted = match params {
        Params::Knn { n_neighbors } => {
            if samples.len() < n_neighbors {
                return Err(LearnError::TooFewRows { need: n_neighbors, got: samples.len() });
            }
            Fitted::Knn(Knn::fit(&samples.x, &samples.y, n_neighbors))
        }
        _ if neg.min(pos) < 2 => return Err(LearnError::InsufficientRows { need: 2, got: neg.min(pos) }),
        Params::GaussianNb { var_smoothing } => {
            Fitted::GaussianNb(GaussianNb::fit(&samples.x, &samples.y, var_smoothing))
        }
        Params::DecisionTree { criterion, max_depth, ccp_alpha } => {
            let tp = TreeParams { criterion, max_depth, ccp_alpha, ..TreeParams::default() };
            let rows: Vec<usize> = (0..samples.len()).collect();
            Fitted::Tree(Tree::fit(&samples.x, &samples.y, &rows, tp, seed))
        }
        Params::RandomForest { n_estimators, max_depth } => {
            let d = samples.features.len().max(1);
            let tp = TreeParams {
                max_depth,
                max_features: Some(((d as f64).sqrt().floor() as usize).max(1)),
                ..TreeParams::default()
            };
            Fitted::Forest(Forest::fit(&samples.x, &samples.y, n_estimators, tp, seed))
        }
    };
    Ok(Model { params, fingerprint: schema_fingerprint(&samples.features), features: samples.features.clone(), fitted })
}

/// Class-1 probabilities for rows laid out in the model's own column order.
pub fn predict_proba(model: &Model, rows: &[Vec<f64>]) -> Result<Vec<f64>, LearnError> {
    if let Some(r) = rows.iter().find(|r| r.len() != model.features.len()) {
        return Err(LearnError::SchemaMismatch(format!(
            "row has {} values, model expects {}",
            r.len(),
            model.features.len()
        )));
    }
    Ok(rows.iter().map(|r| model.predict_row(r)).collect())
}

/// Class-1 probabilities for samples in any column order; columns are
/// matched to the model by name.
pub fn predict_samples(model: &Model, samples: &Samples) -> Result<Vec<f64>, LearnError> {
    let aligned = if samples.features == model.features { samples.clone() } else { samples.select(&model.features)? };
    predict_proba(model, &aligned.x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn samples(x: Vec<Vec<f64>>, y: Vec<u8>) -> Samples {
        let d = x[0].len();
        Samples { features: (0..d).map(|i| format!("f{i}")).collect(), x, y }
    }

    fn xor() -> Samples {
        let mut x = Vec::new();
        let mut y = Vec::new();
        for i in 0..80 {
            let a = (i % 2) as f64 + (i as f64 * 0.013) % 0.3;
            let b = ((i / 2) % 2) as f64 + (i as f64 * 0.029) % 0.3;
            x.push(vec![a, b]);
            y.push(((i % 2) ^ ((i / 2) % 2)) as u8);
        }
        samples(x, y)
    }

    #[test]
    fn grids_have_the_documented_sizes() {
        assert_eq!(param_grid(ClassifierKind::Knn).len(), 6);
        assert_eq!(param_grid(ClassifierKind::GaussianNb).len(), 4);
        assert_eq!(param_grid(ClassifierKind::DecisionTree).len(), 45);
        assert_eq!(param_grid(ClassifierKind::RandomForest).len(), 12);
    }

    #[test]
    fn forest_depth_matters_on_xor() {
        let s = xor();
        let stump = train(&s, Params::RandomForest { n_estimators: 1, max_depth: Some(1) }, 3).unwrap();
        let full = train(&s, Params::RandomForest { n_estimators: 100, max_depth: None }, 3).unwrap();
        let auc = |m: &Model| roc_auc(&s.y, &predict_proba(m, &s.x).unwrap()).unwrap();
        assert!((auc(&stump) - 0.5).abs() < 0.15, "{}", auc(&stump));
        assert!(auc(&full) > 0.9);
    }

    #[test]
    fn naive_bayes_is_symmetric() {
        let x = vec![vec![-1.0], vec![-2.0], vec![1.0], vec![2.0]];
        let m = train(&samples(x, vec![0, 0, 1, 1]), Params::GaussianNb { var_smoothing: 1e-9 }, 0).unwrap();
        assert!((m.predict_row(&[0.0]) - 0.5).abs() < 1e-12);
        assert!((m.predict_row(&[0.5]) + m.predict_row(&[-0.5]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn knn_votes_and_schema_checks() {
        let s = samples(vec![vec![0.0], vec![1.0], vec![2.0], vec![10.0], vec![11.0]], vec![0, 0, 1, 1, 1]);
        let m = train(&s, Params::Knn { n_neighbors: 3 }, 0).unwrap();
        assert!((m.predict_row(&[0.5]) - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(m.predict_row(&[10.5]), 1.0);
        assert!(matches!(predict_proba(&m, &[vec![1.0, 2.0]]), Err(LearnError::SchemaMismatch(_))));
        assert!(matches!(train(&s, Params::Knn { n_neighbors: 9 }, 0), Err(LearnError::TooFewRows { .. })));
        let one = samples(vec![vec![0.0], vec![1.0]], vec![1, 1]);
        assert_eq!(train(&one, Params::Knn { n_neighbors: 1 }, 0).unwrap_err(), LearnError::SingleClass);
    }

    #[test]
    fn column_order_does_not_change_forest_predictions() {
        let s = xor();
        let m = train(&s, Params::RandomForest { n_estimators: 20, max_depth: None }, 1).unwrap();
        let swapped = s.select(&["f1".to_string(), "f0".to_string()]).unwrap();
        assert_eq!(predict_samples(&m, &s).unwrap(), predict_samples(&m, &swapped).unwrap());
    }

    #[test]
    fn all_trees_agree_on_clean_data() {
        let x: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let y: Vec<u8> = (0..40).map(|i| (i >= 20) as u8).collect();
        let m = train(&samples(x, y), Params::RandomForest { n_estimators: 10, max_depth: None }, 5).unwrap();
        assert_eq!(m.predict_row(&[-5.0]), 0.0);
        assert_eq!(m.predict_row(&[50.0]), 1.0);
    }
}
