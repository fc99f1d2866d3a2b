use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::rank_test::{cliffs_delta, mann_whitney_u};

/// When two sides of a split count as different.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkConfig {
    /// Mann-Whitney p must fall below this.
    pub alpha: f64,
    /// Cliff's |δ| must exceed this.
    pub min_delta: f64,
}

impl Default for SkConfig {
    fn default() -> Self {
        SkConfig { alpha: 0.05, min_delta: 0.147 }
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn median(x: &[f64]) -> f64 {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Split point of `groups` maximizing the between-part sum of squares.
fn best_split(groups: &[&Vec<f64>]) -> usize {
    let all: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let grand = mean(&all);
    let mut best = (1, f64::NEG_INFINITY);
    for cut in 1..groups.len() {
        let left: Vec<f64> = groups[..cut].iter().flat_map(|g| g.iter().copied()).collect();
        let right: Vec<f64> = groups[cut..].iter().flat_map(|g| g.iter().copied()).collect();
        let ss =
            left.len() as f64 * (mean(&left) - grand).powi(2) + right.len() as f64 * (mean(&right) - grand).powi(2);
        if ss > best.1 + 1e-12 {
            best = (cut, ss);
        }
    }
    best.0
}

fn partition(groups: &[&Vec<f64>], cfg: SkConfig, out: &mut Vec<usize>) {
    if groups.len() < 2 {
        out.push(groups.len());
        return;
    }
    let cut = best_split(groups);
    let left: Vec<f64> = groups[..cut].iter().flat_map(|g| g.iter().copied()).collect();
    let right: Vec<f64> = groups[cut..].iter().flat_map(|g| g.iter().copied()).collect();
    let p = mann_whitney_u(&left, &right).unwrap_or(1.0);
    let delta = cliffs_delta(&left, &right).map(|d| d.0).unwrap_or(0.0);
    if p < cfg.alpha && delta.abs() > cfg.min_delta {
        partition(&groups[..cut], cfg, out);
        partition(&groups[cut..], cfg, out);
    } else {
        out.push(groups.len());
    }
}

/// Dense ranks, 1 for the group with the highest values. Groups are ordered
/// by median (then name) and split recursively where the two sides differ
/// with Mann-Whitney p < 0.05 and Cliff's |δ| > 0.147.
pub fn scott_knott_esd(groups: &BTreeMap<String, Vec<f64>>) -> BTreeMap<String, usize> {
    scott_knott_esd_with(groups, SkConfig::default())
}

pub fn scott_knott_esd_with(groups: &BTreeMap<String, Vec<f64>>, cfg: SkConfig) -> BTreeMap<String, usize> {
    let mut order: Vec<(&String, &Vec<f64>)> = groups.iter().filter(|(_, v)| !v.is_empty()).collect();
    order.sort_by(|a, b| median(b.1).total_cmp(&median(a.1)).then_with(|| a.0.cmp(b.0)));
    let values: Vec<&Vec<f64>> = order.iter().map(|(_, v)| *v).collect();
    let mut sizes = Vec::new();
    partition(&values, cfg, &mut sizes);
    let mut out = BTreeMap::new();
    let mut it = order.iter();
    for (rank, size) in sizes.iter().enumerate() {
        for _ in 0..*size {
            let (name, _) = it.next().expect("sizes cover every group");
            out.insert((*name).clone(), rank + 1);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn around(center: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| center + ((i * 37) % 21) as f64 * 0.001 - 0.01).collect()
    }

    #[test]
    fn separated_groups_get_distinct_ranks() {
        let g: BTreeMap<String, Vec<f64>> = [("A".into(), around(0.9, 100)), ("B".into(), around(0.5, 100))].into();
        let r = scott_knott_esd(&g);
        assert_eq!((r["A"], r["B"]), (1, 2));
    }

    #[test]
    fn identical_groups_share_rank_one() {
        let g: BTreeMap<String, Vec<f64>> = [("A".into(), around(0.7, 50)), ("B".into(), around(0.7, 50))].into();
        let r = scott_knott_esd(&g);
        assert_eq!((r["A"], r["B"]), (1, 1));
    }

    #[test]
    fn three_groups() {
        let g: BTreeMap<String, Vec<f64>> =
            [("A".into(), around(0.9, 60)), ("B".into(), around(0.9, 60)), ("C".into(), around(0.5, 60))].into();
        let r = scott_knott_esd(&g);
        assert_eq!((r["A"], r["B"], r["C"]), (1, 1, 2));
    }
}
