//! Additive feature attributions for tree models and the rankings built on
//! them.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::learner::{Model, Node, Samples, Tree};
use crate::stats::{scott_knott_esd_with, SkConfig};

/// Largest allowed gap between a prediction and base + Σφ.
pub const LOCAL_ACCURACY_TOL: f64 = 1e-9;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ExplainError {
    #[error("feature schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("model has no trees")]
    NotTreeModel,
    #[error("nothing to explain: {0}")]
    Empty(String),
    #[error("row {row}: base + attributions = {sum}, prediction = {prediction}")]
    LocalAccuracy { row: usize, sum: f64, prediction: f64 },
}

#[derive(Debug, Clone)]
struct PathElem {
    feature: Option<usize>,
    zero: f64,
    one: f64,
    weight: f64,
}

fn extend(path: &mut Vec<PathElem>, zero: f64, one: f64, feature: Option<usize>) {
    let l = path.len();
    path.push(PathElem { feature, zero, one, weight: if l == 0 { 1.0 } else { 0.0 } });
    for i in (0..l).rev() {
        path[i + 1].weight += one * path[i].weight * (i + 1) as f64 / (l + 1) as f64;
        path[i].weight = zero * path[i].weight * (l - i) as f64 / (l + 1) as f64;
    }
}

fn unwind(path: &mut Vec<PathElem>, at: usize) {
    let d = path.len() - 1;
    let (one, zero) = (path[at].one, path[at].zero);
    let mut next = path[d].weight;
    for i in (0..d).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next * (d + 1) as f64 / ((i + 1) as f64 * one);
            next = tmp - path[i].weight * zero * (d - i) as f64 / (d + 1) as f64;
        } else {
            path[i].weight = path[i].weight * (d + 1) as f64 / (zero * (d - i) as f64);
        }
    }
    for i in at..d {
        path[i].feature = path[i + 1].feature;
        path[i].zero = path[i + 1].zero;
        path[i].one = path[i + 1].one;
    }
    path.pop();
}

fn unwound_sum(path: &[PathElem], at: usize) -> f64 {
    let d = path.len() - 1;
    let (one, zero) = (path[at].one, path[at].zero);
    let mut next = path[d].weight;
    let mut total = 0.0;
    for i in (0..d).rev() {
        if one != 0.0 {
            let tmp = next * (d + 1) as f64 / ((i + 1) as f64 * one);
            total += tmp;
            next = path[i].weight - tmp * zero * (d - i) as f64 / (d + 1) as f64;
        } else if zero != 0.0 {
            total += path[i].weight / zero / ((d - i) as f64 / (d + 1) as f64);
        }
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    tree: &Tree,
    row: &[f64],
    phi: &mut [f64],
    node: usize,
    mut path: Vec<PathElem>,
    zero: f64,
    one: f64,
    feature: Option<usize>,
) {
    extend(&mut path, zero, one, feature);
    match tree.nodes[node] {
        Node::Leaf { value, .. } => {
            for i in 1..path.len() {
                let w = unwound_sum(&path, i);
                let e = &path[i];
                phi[e.feature.expect("only the root element lacks a feature")] += w * (e.one - e.zero) * value;
            }
        }
        Node::Split { feature: f, threshold, left, right, cover } => {
            let (hot, cold) = if row[f] <= threshold { (left, right) } else { (right, left) };
            let (mut in_zero, mut in_one) = (1.0, 1.0);
            if let Some(at) = path.iter().position(|e| e.feature == Some(f)) {
                in_zero = path[at].zero;
                in_one = path[at].one;
                unwind(&mut path, at);
            }
            let hot_share = tree.nodes[hot].cover() / cover;
            let cold_share = tree.nodes[cold].cover() / cover;
            recurse(tree, row, phi, hot, path.clone(), hot_share * in_zero, in_one, Some(f));
            recurse(tree, row, phi, cold, path, cold_share * in_zero, 0.0, Some(f));
        }
    }
}

/// Cover-weighted mean leaf value: the tree's expected output over its
/// own training sample.
pub fn tree_expectation(tree: &Tree) -> f64 {
    let root = tree.nodes[0].cover();
    tree.nodes
        .iter()
        .map(|n| match n {
            Node::Leaf { value, cover } => value * cover / root,
            Node::Split { .. } => 0.0,
        })
        .sum()
}

/// Path-dependent tree SHAP values of one tree.
pub fn tree_shap(tree: &Tree, row: &[f64], n_features: usize) -> Vec<f64> {
    let mut phi = vec![0.0; n_features];
    recurse(tree, row, &mut phi, 0, Vec::new(), 1.0, 1.0, None);
    phi
}

fn model_trees(model: &Model) -> Result<&[Tree], ExplainError> {
    model.trees().ok_or(ExplainError::NotTreeModel)
}

/// Attributions of one row (in the model's column order) and the base
/// value; ensemble values are means over trees.
pub fn tree_shap_row(model: &Model, row: &[f64]) -> Result<(Vec<f64>, f64), ExplainError> {
    let trees = model_trees(model)?;
    let d = model.features.len();
    if row.len() != d {
        return Err(ExplainError::SchemaMismatch(format!("row has {} values, model expects {d}", row.len())));
    }
    let mut phi = vec![0.0; d];
    for t in trees {
        for (p, v) in phi.iter_mut().zip(tree_shap(t, row, d)) {
            *p += v;
        }
    }
    let k = trees.len() as f64;
    phi.iter_mut().for_each(|p| *p /= k);
    let base = trees.iter().map(tree_expectation).sum::<f64>() / k;
    Ok((phi, base))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapMatrix {
    pub features: Vec<String>,
    pub base_value: f64,
    /// One row of attributions per explained sample.
    pub phi: Vec<Vec<f64>>,
}

/// Attributions of every sample; columns are matched to the model by name.
/// Fails if any row breaks local accuracy.
pub fn shap_table(model: &Model, samples: &Samples) -> Result<ShapMatrix, ExplainError> {
    let trees = model_trees(model)?;
    let aligned = if samples.features == model.features {
        samples.clone()
    } else {
        samples.select(&model.features).map_err(|e| ExplainError::SchemaMismatch(e.to_string()))?
    };
    let base = trees.iter().map(tree_expectation).sum::<f64>() / trees.len() as f64;
    let phi: Vec<Vec<f64>> =
        aligned.x.par_iter().map(|r| tree_shap_row(model, r).map(|(p, _)| p)).collect::<Result<_, _>>()?;
    for (i, (p, r)) in phi.iter().zip(&aligned.x).enumerate() {
        let sum = base + p.iter().sum::<f64>();
        let prediction = model.predict_row(r);
        if (sum - prediction).abs() > LOCAL_ACCURACY_TOL {
            return Err(ExplainError::LocalAccuracy { row: i, sum, prediction });
        }
    }
    Ok(ShapMatrix { features: model.features.clone(), base_value: base, phi })
}

/// Σ over rows of |φ| per feature.
pub fn global_importance(shap: &ShapMatrix) -> Result<Vec<f64>, ExplainError> {
    if shap.phi.is_empty() {
        return Err(ExplainError::Empty("no rows".into()));
    }
    let mut out = vec![0.0; shap.features.len()];
    for row in &shap.phi {
        for (o, p) in out.iter_mut().zip(row) {
            *o += p.abs();
        }
    }
    Ok(out)
}

/// Which rows the per-bootstrap importance is computed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapRows {
    /// Every usable row of the release.
    #[default]
    Full,
    /// The bootstrap's in-bag rows.
    InBag,
}

/// Scott-Knott ESD over each feature's importance distribution; rank 1 is
/// the most important group.
pub fn per_release_feature_ranks(
    features: &[String],
    importances: &[Vec<f64>],
) -> Result<BTreeMap<String, usize>, ExplainError> {
    per_release_feature_ranks_with(features, importances, SkConfig::default())
}

pub fn per_release_feature_ranks_with(
    features: &[String],
    importances: &[Vec<f64>],
    sk: SkConfig,
) -> Result<BTreeMap<String, usize>, ExplainError> {
    if importances.is_empty() {
        return Err(ExplainError::Empty("no importance vectors".into()));
    }
    let groups: BTreeMap<String, Vec<f64>> = features
        .iter()
        .enumerate()
        .map(|(f, name)| (name.clone(), importances.iter().map(|v| v[f]).collect()))
        .collect();
    Ok(scott_knott_esd_with(&groups, sk))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRankTable {
    /// Release → feature → rank within that release.
    pub per_release: BTreeMap<String, BTreeMap<String, usize>>,
    /// Feature → rank across releases.
    pub final_rank: BTreeMap<String, usize>,
}

impl FeatureRankTable {
    /// Ranks a feature received, one per release.
    pub fn distribution(&self, feature: &str) -> Vec<usize> {
        self.per_release.values().filter_map(|r| r.get(feature).copied()).collect()
    }

    /// Features ordered by final rank, then name.
    pub fn ordered(&self) -> Vec<(&str, usize)> {
        let mut v: Vec<(&str, usize)> = self.final_rank.iter().map(|(k, r)| (k.as_str(), *r)).collect();
        v.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(b.0)));
        v
    }

    /// feature, one column per release, final_rank.
    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let releases: Vec<&String> = self.per_release.keys().collect();
        let mut header = vec!["feature".to_string()];
        header.extend(releases.iter().map(|r| r.to_string()));
        header.push("final_rank".into());
        w.write_record(&header)?;
        for (feature, rank) in self.ordered() {
            let mut rec = vec![feature.to_string()];
            for r in &releases {
                rec.push(self.per_release[*r].get(feature).map_or(String::new(), |v| v.to_string()));
            }
            rec.push(rank.to_string());
            w.write_record(&rec)?;
        }
        w.flush()
    }
}

/// Second Scott-Knott ESD pass over each feature's per-release ranks; a
/// lower rank distribution gives a better final rank.
pub fn final_feature_ranks(
    per_release: &BTreeMap<String, BTreeMap<String, usize>>,
) -> Result<FeatureRankTable, ExplainError> {
    final_feature_ranks_with(per_release, SkConfig::default())
}

pub fn final_feature_ranks_with(
    per_release: &BTreeMap<String, BTreeMap<String, usize>>,
    sk: SkConfig,
) -> Result<FeatureRankTable, ExplainError> {
    if per_release.len() < 2 {
        return Err(ExplainError::Empty(format!("{} release(s); need 2", per_release.len())));
    }
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for ranks in per_release.values() {
        for (f, r) in ranks {
            groups.entry(f.clone()).or_default().push(-(*r as f64));
        }
    }
    Ok(FeatureRankTable { per_release: per_release.clone(), final_rank: scott_knott_esd_with(&groups, sk) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Pushes toward the defective class.
    TowardDefect,
    TowardClean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub feature: String,
    pub value: f64,
    pub phi: f64,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalReport {
    pub prediction: f64,
    pub base_value: f64,
    pub top: Vec<Attribution>,
}

impl LocalReport {
    pub fn render(&self) -> String {
        let mut out = format!("prediction {:.4} (base {:.4})\n", self.prediction, self.base_value);
        for a in &self.top {
            let arrow = match a.direction {
                Direction::TowardDefect => "+",
                Direction::TowardClean => "-",
            };
            out.push_str(&format!("  {arrow} {:<24} {:>+.4}  (value {})\n", a.feature, a.phi, a.value));
        }
        out
    }
}

/// The `top_n` largest non-zero attributions of one row, by |φ|.
pub fn local_report(model: &Model, row: &[f64], top_n: usize) -> Result<LocalReport, ExplainError> {
    if top_n == 0 {
        return Err(ExplainError::Empty("top_n is 0".into()));
    }
    let (phi, base) = tree_shap_row(model, row)?;
    let mut order: Vec<usize> = (0..phi.len()).filter(|i| phi[*i] != 0.0).collect();
    order.sort_by(|a, b| phi[*b].abs().total_cmp(&phi[*a].abs()).then(a.cmp(b)));
    order.truncate(top_n);
    let top = order
        .into_iter()
        .map(|i| Attribution {
            feature: model.features[i].clone(),
            value: row[i],
            phi: phi[i],
            direction: if phi[i] > 0.0 { Direction::TowardDefect } else { Direction::TowardClean },
        })
        .collect();
    Ok(LocalReport { prediction: model.predict_row(row), base_value: base, top })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::{Fitted, Params};

    fn model_of(tree: Tree, d: usize) -> Model {
        Model {
            params: Params::DecisionTree {
                criterion: crate::learner::Criterion::Gini,
                max_depth: None,
                ccp_alpha: 0.0,
            },
            features: (0..d).map(|i| format!("f{i}")).collect(),
            fingerprint: String::new(),
            fitted: Fitted::Tree(tree),
        }
    }

    #[test]
    fn single_leaf_has_no_attribution() {
        let m = model_of(Tree { nodes: vec![Node::Leaf { value: 0.3, cover: 10.0 }] }, 2);
        let (phi, base) = tree_shap_row(&m, &[1.0, 2.0]).unwrap();
        assert_eq!((phi, base), (vec![0.0, 0.0], 0.3));
    }

    #[test]
    fn stump_attribution_is_leaf_minus_base() {
        let tree = Tree {
            nodes: vec![
                Node::Split { feature: 0, threshold: 0.5, left: 1, right: 2, cover: 4.0 },
                Node::Leaf { value: 0.0, cover: 3.0 },
                Node::Leaf { value: 1.0, cover: 1.0 },
            ],
        };
        let m = model_of(tree, 1);
        let (phi, base) = tree_shap_row(&m, &[1.0]).unwrap();
        assert_eq!(base, 0.25);
        assert!((phi[0] - 0.75).abs() < 1e-12);
        let r = local_report(&m, &[1.0], 5).unwrap();
        assert_eq!(r.top.len(), 1);
        assert_eq!(r.top[0].direction, Direction::TowardDefect);
    }

    #[test]
    fn importance_sums_absolute_values() {
        let s = ShapMatrix {
            features: vec!["a".into(), "b".into()],
            base_value: 0.0,
            phi: vec![vec![0.3, -0.1], vec![-0.2, 0.0]],
        };
        let g = global_importance(&s).unwrap();
        assert!((g[0] - 0.5).abs() < 1e-12 && (g[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn final_ranks_prefer_consistently_top_features() {
        let per: BTreeMap<String, BTreeMap<String, usize>> = (0..5)
            .map(|r| {
                let ranks = [("a".to_string(), 1), ("b".to_string(), 2 + r % 2), ("c".to_string(), 4)].into();
                (format!("r{r}"), ranks)
            })
            .collect();
        let t = final_feature_ranks(&per).unwrap();
        assert_eq!(t.final_rank["a"], 1);
        assert_eq!(t.distribution("c"), vec![4; 5]);
    }
}
