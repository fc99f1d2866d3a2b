use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{Tree, TreeParams};

/// Bagged trees; the prediction is the mean leaf probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<Tree>,
    /// Seed each tree's bootstrap and feature sampling came from.
    pub seeds: Vec<u64>,
}

impl Forest {
    pub fn fit(x: &[Vec<f64>], y: &[u8], n_trees: usize, params: TreeParams, seed: u64) -> Forest {
        let n = x.len();
        let seeds: Vec<u64> = (0..n_trees as u64).map(|t| seed ^ t.wrapping_mul(0x9E37_79B9_7F4A_7C15)).collect();
        let trees = seeds
            .par_iter()
            .map(|s| {
                let mut rng = ChaCha8Rng::seed_from_u64(*s);
                let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                Tree::fit(x, y, &rows, params, rng.random())
            })
            .collect();
        Forest { trees, seeds }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / self.trees.len() as f64
    }
}

/// Mean and scale fitted on training rows; constant columns keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Standardizer {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len() as f64;
        let mut mean = vec![0.0; d];
        let mut scale = vec![0.0; d];
        for j in 0..d {
            mean[j] = x.iter().map(|r| r[j]).sum::<f64>() / n;
            let var = x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
            scale[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }
        Standardizer { mean, scale }
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter().zip(&self.mean).zip(&self.scale).map(|((v, m), s)| (v - m) / s).collect()
    }
}

/// k-nearest neighbours on standardized features; the probability is the
/// share of positive neighbours. Distance ties go to the earlier row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub scaler: Standardizer,
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl Knn {
    pub fn fit(x: &[Vec<f64>], y: &[u8], k: usize) -> Knn {
        let scaler = Standardizer::fit(x);
        Knn { k, points: x.iter().map(|r| scaler.apply(r)).collect(), labels: y.to_vec(), scaler }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let q = self.scaler.apply(row);
        let mut d: Vec<(f64, usize)> = self
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum(), i))
            .collect();
        let k = self.k.min(d.len());
        d.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        d[..k].iter().map(|(_, i)| self.labels[*i] as f64).sum::<f64>() / k as f64
    }
}

/// Gaussian naive Bayes. `var_smoothing` times the largest feature variance
/// is added to every per-class variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub log_prior: [f64; 2],
    pub mean: [Vec<f64>; 2],
    pub var: [Vec<f64>; 2],
}

impl GaussianNb {
    pub fn fit(x: &[Vec<f64>], y: &[u8], var_smoothing: f64) -> GaussianNb {
        let d = x.first().map_or(0, Vec::len);
        let n = x.len() as f64;
        let overall = Standardizer::fit(x);
        let max_var =
            (0..d).map(|j| x.iter().map(|r| (r[j] - overall.mean[j]).powi(2)).sum::<f64>() / n).fold(0.0, f64::max);
        let eps = var_smoothing * max_var;
        let fit_class = |c: u8| {
            let rows: Vec<&Vec<f64>> = x.iter().zip(y).filter(|(_, l)| **l == c).map(|(r, _)| r).collect();
            let m = rows.len() as f64;
            let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / m).collect();
            let var: Vec<f64> =
                (0..d).map(|j| rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / m + eps).collect();
            ((m / n).ln(), mean, var)
        };
        let (p0, m0, v0) = fit_class(0);
        let (p1, m1, v1) = fit_class(1);
        GaussianNb { log_prior: [p0, p1], mean: [m0, m1], var: [v0, v1] }
    }

    fn joint(&self, c: usize, row: &[f64]) -> f64 {
        let mut out = self.log_prior[c];
        for ((v, m), s) in row.iter().zip(&self.mean[c]).zip(&self.var[c]) {
            if *s > 0.0 {
                out -= 0.5 * ((2.0 * std::f64::consts::PI * s).ln() + (v - m).powi(2) / s);
            } else if v != m {
                // Zero variance with no smoothing: impossible value.
                return f64::NEG_INFINITY;
            }
        }
        out
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let (a, b) = (self.joint(0, row), self.joint(1, row));
        if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
            return 0.5;
        }
        1.0 / (1.0 + (a - b).exp())
    }
}
