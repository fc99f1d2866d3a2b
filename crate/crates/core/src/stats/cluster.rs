use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::StatsError;

/// Principal components of standardized columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    /// Row scores on the kept components.
    pub scores: Vec<Vec<f64>>,
    /// One row per kept component, one entry per kept input column.
    pub loadings: Vec<Vec<f64>>,
    /// Explained-variance share of every component, descending.
    pub explained: Vec<f64>,
    pub n_components: usize,
    /// Input columns used; constant ones are left out.
    pub kept_columns: Vec<usize>,
}

/// Standardizes columns (population standard deviation), drops constant
/// ones, and keeps the fewest leading components whose cumulative explained
/// variance reaches `threshold`.
pub fn pca_reduce(rows: &[Vec<f64>], threshold: f64) -> Result<Pca, StatsError> {
    let n = rows.len();
    if n == 0 {
        return Err(StatsError::EmptySample);
    }
    let width = rows[0].len();
    let mut kept = Vec::new();
    let mut stats = Vec::new();
    for c in 0..width {
        let mean = rows.iter().map(|r| r[c]).sum::<f64>() / n as f64;
        let var = rows.iter().map(|r| (r[c] - mean).powi(2)).sum::<f64>() / n as f64;
        if var > 1e-24 {
            kept.push(c);
            stats.push((mean, var.sqrt()));
        } else {
            log::debug!("PCA: dropping constant column {c}");
        }
    }
    if kept.is_empty() {
        return Err(StatsError::AllConstant);
    }
    let z = DMatrix::from_fn(n, kept.len(), |r, j| (rows[r][kept[j]] - stats[j].0) / stats[j].1);
    let cov = (z.transpose() * &z) / n as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..kept.len()).collect();
    order.sort_by(|a, b| eig.eigenvalues[*b].total_cmp(&eig.eigenvalues[*a]).then(a.cmp(b)));
    let values: Vec<f64> = order.iter().map(|i| eig.eigenvalues[*i].max(0.0)).collect();
    let total: f64 = values.iter().sum();
    let explained: Vec<f64> = values.iter().map(|v| v / total).collect();
    let mut cumulative = 0.0;
    let mut n_components = explained.len();
    for (i, e) in explained.iter().enumerate() {
        cumulative += e;
        if cumulative >= threshold - 1e-12 {
            n_components = i + 1;
            break;
        }
    }
    let loadings: Vec<Vec<f64>> = order[..n_components]
        .iter()
        .map(|i| {
            let v = eig.eigenvectors.column(*i);
            // Sign convention: largest-magnitude entry positive.
            let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            let s = if pivot < 0.0 { -1.0 } else { 1.0 };
            v.iter().map(|x| x * s).collect()
        })
        .collect();
    let scores = (0..n)
        .map(|r| loadings.iter().map(|l| l.iter().enumerate().map(|(j, w)| z[(r, j)] * w).sum()).collect())
        .collect();
    Ok(Pca { scores, loadings, explained, n_components, kept_columns: kept })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Cluster of every row; ids are dense and numbered by first appearance.
    pub assignment: Vec<usize>,
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn distinct_points(points: &[Vec<f64>]) -> usize {
    points.iter().map(|p| p.iter().map(|v| v.to_bits()).collect::<Vec<_>>()).collect::<BTreeSet<_>>().len()
}

/// Greedy k-means++ seeding: each new center is the best of several
/// D²-weighted candidates.
fn seed_centers(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let trials = 2 + (k as f64).ln().floor() as usize;
    let mut centers = vec![points[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let mut best: Option<(f64, usize, Vec<f64>)> = None;
        for _ in 0..trials {
            let idx = if total > 0.0 {
                let mut t = rng.random::<f64>() * total;
                let mut chosen = n - 1;
                for (i, d) in d2.iter().enumerate() {
                    if t < *d {
                        chosen = i;
                        break;
                    }
                    t -= d;
                }
                chosen
            } else {
                rng.random_range(0..n)
            };
            let nd: Vec<f64> = points.iter().zip(&d2).map(|(p, d)| d.min(sq_dist(p, &points[idx]))).collect();
            let potential: f64 = nd.iter().sum();
            if best.as_ref().is_none_or(|b| potential < b.0) {
                best = Some((potential, idx, nd));
            }
        }
        let (_, idx, nd) = best.expect("at least one trial");
        centers.push(points[idx].clone());
        d2 = nd;
    }
    centers
}

fn lloyd(points: &[Vec<f64>], mut centers: Vec<Vec<f64>>) -> (Vec<usize>, Vec<Vec<f64>>, f64) {
    let k = centers.len();
    let dim = points[0].len();
    let mut assignment = vec![usize::MAX; points.len()];
    let mut last_inertia = f64::INFINITY;
    for _ in 0..300 {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let c =
                (0..k).min_by(|a, b| sq_dist(p, &centers[*a]).total_cmp(&sq_dist(p, &centers[*b]))).expect("k >= 1");
            if assignment[i] != c {
                assignment[i] = c;
                changed = true;
            }
        }
        let inertia: f64 = points.iter().zip(&assignment).map(|(p, c)| sq_dist(p, &centers[*c])).sum();
        debug_assert!(inertia <= last_inertia + 1e-9 * last_inertia.abs().max(1.0));
        last_inertia = inertia;
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, c) in points.iter().zip(&assignment) {
            counts[*c] += 1;
            for (s, v) in sums[*c].iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                // Refill an empty cluster with the point farthest from its center.
                let far = (0..points.len())
                    .max_by(|a, b| {
                        sq_dist(&points[*a], &centers[assignment[*a]])
                            .total_cmp(&sq_dist(&points[*b], &centers[assignment[*b]]))
                    })
                    .expect("points non-empty");
                centers[c] = points[far].clone();
                assignment[far] = c;
            } else {
                centers[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }
    let inertia = points.iter().zip(&assignment).map(|(p, c)| sq_dist(p, &centers[*c])).sum();
    (assignment, centers, inertia)
}

/// Renumbers clusters by first appearance.
fn canonical(assignment: Vec<usize>, centers: Vec<Vec<f64>>, inertia: f64) -> Clustering {
    let mut map = BTreeMap::new();
    for c in &assignment {
        let next = map.len();
        map.entry(*c).or_insert(next);
    }
    let k = centers.len();
    let mut centroids = vec![Vec::new(); k];
    let mut next = map.len();
    for (old, c) in centers.into_iter().enumerate() {
        let new = *map.entry(old).or_insert_with(|| {
            next += 1;
            next - 1
        });
        centroids[new] = c;
    }
    Clustering { assignment: assignment.into_iter().map(|c| map[&c]).collect(), k, centroids, inertia }
}

const RESTARTS: u64 = 10;

/// Ten seeded restarts of greedy k-means++ and Lloyd iterations; the lowest
/// inertia wins, ties going to the earliest restart.
pub fn kmeans_cluster(points: &[Vec<f64>], k: usize, seed: u64) -> Result<Clustering, StatsError> {
    if k < 2 {
        return Err(StatsError::Invalid(format!("k = {k}")));
    }
    if points.len() < k {
        return Err(StatsError::TooShort { need: k, got: points.len() });
    }
    let distinct = distinct_points(points);
    if distinct < k {
        return Err(StatsError::DegenerateData { distinct, k });
    }
    let runs: Vec<(Vec<usize>, Vec<Vec<f64>>, f64)> = (0..RESTARTS)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ r);
            lloyd(points, seed_centers(points, k, &mut rng))
        })
        .collect();
    let best = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.2.total_cmp(&b.2).then(i.cmp(j)))
        .map(|(_, r)| r)
        .expect("restarts > 0");
    Ok(canonical(best.0, best.1, best.2))
}

fn distance_matrix(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points.par_iter().map(|p| points.iter().map(|q| sq_dist(p, q).sqrt()).collect()).collect()
}

fn silhouette_from(assignment: &[usize], k: usize, dist: &[Vec<f64>]) -> f64 {
    let n = assignment.len();
    let mut sizes = vec![0usize; k];
    for c in assignment {
        sizes[*c] += 1;
    }
    // Collected before summing so the addition order never depends on threads.
    let per_point: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let own = assignment[i];
            if sizes[own] <= 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for j in 0..n {
                sums[assignment[j]] += dist[i][j];
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|c| *c != own && sizes[*c] > 0)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let m = a.max(b);
            if m == 0.0 || !m.is_finite() {
                0.0
            } else {
                (b - a) / m
            }
        })
        .collect();
    per_point.iter().sum::<f64>() / n as f64
}

/// Mean silhouette with Euclidean distances; points in singleton clusters
/// score 0.
pub fn mean_silhouette(clustering: &Clustering, points: &[Vec<f64>]) -> f64 {
    silhouette_from(&clustering.assignment, clustering.k, &distance_matrix(points))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChooseK {
    pub k: usize,
    /// Mean silhouette per candidate k; None when k-means could not run.
    pub scores: Vec<(usize, Option<f64>)>,
    pub clustering: Clustering,
}

/// The k in `range` with the highest mean silhouette, ties within 1e-12 to
/// the smaller k. The upper bound is clamped to rows − 1.
pub fn choose_k(points: &[Vec<f64>], range: std::ops::RangeInclusive<usize>, seed: u64) -> Result<ChooseK, StatsError> {
    if points.len() <= 2 {
        return Err(StatsError::TooShort { need: 3, got: points.len() });
    }
    let lo = (*range.start()).max(2);
    let hi = (*range.end()).min(points.len() - 1);
    if lo > hi {
        return Err(StatsError::Invalid(format!("empty k range {lo}..={hi}")));
    }
    let dist = distance_matrix(points);
    let runs: Vec<(usize, Option<(f64, Clustering)>)> = (lo..=hi)
        .into_par_iter()
        .map(|k| {
            let c = kmeans_cluster(points, k, seed ^ k as u64).ok();
            (k, c.map(|c| (silhouette_from(&c.assignment, c.k, &dist), c)))
        })
        .collect();
    let scores: Vec<(usize, Option<f64>)> = runs.iter().map(|(k, r)| (*k, r.as_ref().map(|x| x.0))).collect();
    let k = best_k(&scores).ok_or(StatsError::DegenerateData { distinct: distinct_points(points), k: lo })?;
    let clustering =
        runs.into_iter().find(|(c, _)| *c == k).and_then(|(_, r)| r).map(|(_, c)| c).expect("best k has a clustering");
    Ok(ChooseK { k, scores, clustering })
}

/// Highest score; a later k must beat the current best by more than 1e-12.
fn best_k(scores: &[(usize, Option<f64>)]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in scores {
        if let Some(s) = s {
            if best.is_none_or(|(_, b)| *s > b + 1e-12) {
                best = Some((*k, *s));
            }
        }
    }
    best.map(|(k, _)| k)
}

fn choose2(n: f64) -> f64 {
    n * (n - 1.0) / 2.0
}

/// Adjusted Rand index of two labelings of the same rows.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    let mut table: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, f64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, f64> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        *table.entry((*x, *y)).or_default() += 1.0;
        *rows.entry(*x).or_default() += 1.0;
        *cols.entry(*y).or_default() += 1.0;
    }
    let index: f64 = table.values().map(|n| choose2(*n)).sum();
    let sa: f64 = rows.values().map(|n| choose2(*n)).sum();
    let sb: f64 = cols.values().map(|n| choose2(*n)).sum();
    let expected = sa * sb / choose2(a.len() as f64);
    let max = (sa + sb) / 2.0;
    if (max - expected).abs() < 1e-12 {
        // Both labelings trivial: agreement is perfect.
        return Ok(if (index - expected).abs() < 1e-12 { 1.0 } else { 0.0 });
    }
    Ok((index - expected) / (max - expected))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterComposition {
    pub cluster: usize,
    pub size: usize,
    /// Percentage of this cluster's rows in each other-side cluster.
    pub shares: BTreeMap<usize, f64>,
    /// All rows fall in one other-side cluster.
    pub overlapped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub clusters: Vec<ClusterComposition>,
    pub non_overlapped_pct: f64,
}

/// How each KU cluster's rows spread over the code-metric clusters.
pub fn cluster_overlap_report(ku: &[usize], cm: &[usize]) -> Result<OverlapReport, StatsError> {
    if ku.len() != cm.len() {
        return Err(StatsError::LengthMismatch(ku.len(), cm.len()));
    }
    let mut groups: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (k, c) in ku.iter().zip(cm) {
        *groups.entry(*k).or_default().entry(*c).or_default() += 1;
    }
    let clusters: Vec<ClusterComposition> = groups
        .into_iter()
        .map(|(cluster, counts)| {
            let size: usize = counts.values().sum();
            let shares = counts.iter().map(|(c, n)| (*c, 100.0 * *n as f64 / size as f64)).collect();
            ClusterComposition { cluster, size, shares, overlapped: counts.len() == 1 }
        })
        .collect();
    let non = clusters.iter().filter(|c| !c.overlapped).count();
    let non_overlapped_pct = if clusters.is_empty() { 0.0 } else { 100.0 * non as f64 / clusters.len() as f64 };
    Ok(OverlapReport { clusters, non_overlapped_pct })
}
