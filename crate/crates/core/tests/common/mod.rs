//! Reference implementations and fixtures shared by the integration suites.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;

use kunits::ku::KuVector;
use kunits::learner::{Node, Tree};
use kunits::metrics::PRODUCT_METRIC_NAMES;

pub fn data_dir(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

/// `file K1=2 K4=1 ...` lines; unlisted KUs are zero.
pub fn golden_kus() -> BTreeMap<String, KuVector> {
    let text = std::fs::read_to_string(data_dir("ku_golden").join("expected.txt")).unwrap();
    let mut out = BTreeMap::new();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let mut parts = line.split_whitespace();
        let file = parts.next().unwrap().to_string();
        let mut v = KuVector::default();
        for p in parts {
            let (k, n) = p.split_once('=').unwrap();
            let k: usize = k.trim_start_matches('K').parse().unwrap();
            v.counts[k - 1] = n.parse().unwrap();
        }
        out.insert(file, v);
    }
    out
}

pub fn ku_diff(want: &KuVector, got: &KuVector) -> String {
    (1..=28)
        .filter(|k| want.get(*k) != got.get(*k))
        .map(|k| format!("K{k}: want {} got {}", want.get(k), got.get(k)))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Hand-computed product metrics per file; unlisted metrics are zero.
pub fn oracle_metrics() -> BTreeMap<String, BTreeMap<String, f64>> {
    let text = std::fs::read_to_string(data_dir("metrics_oracle").join("expected.toml")).unwrap();
    let table: toml::Table = toml::from_str(&text).unwrap();
    table
        .into_iter()
        .map(|(file, v)| {
            let metrics = v
                .as_table()
                .unwrap()
                .iter()
                .map(|(k, x)| {
                    assert!(PRODUCT_METRIC_NAMES.contains(&k.as_str()), "{file}: unknown metric {k}");
                    let x = x.as_float().or_else(|| x.as_integer().map(|i| i as f64)).unwrap();
                    (k.clone(), x)
                })
                .collect();
            (file, metrics)
        })
        .collect()
}

pub fn git(repo: &Path, args: &[&str], email: &str) {
    let status = Command::new("git")
        .arg("-C")
        .arg(repo)
        .args(["-c", "user.name=dev", "-c", &format!("user.email={email}"), "-c", "commit.gpgsign=false"])
        .args(args)
        .env("GIT_AUTHOR_DATE", "2020-01-01T00:00:00Z")
        .env("GIT_COMMITTER_DATE", "2020-01-01T00:00:00Z")
        .status()
        .unwrap();
    assert!(status.success(), "git {args:?}");
}

fn append(repo: &Path, file: &str, lines: usize) {
    let path = repo.join(file);
    let mut text = std::fs::read_to_string(&path).unwrap_or_default();
    for i in 0..lines {
        text.push_str(&format!("// line {i}\n"));
    }
    std::fs::write(path, text).unwrap();
}

pub fn commit(repo: &Path, file: &str, lines: usize, email: &str, msg: &str) {
    append(repo, file, lines);
    git(repo, &["add", "-A"], email);
    git(repo, &["commit", "-q", "-m", msg], email);
}

/// One earlier author before `v1`, then three commits by two authors before
/// `v2`, adding 10, 20 and 30 lines to A.java.
pub fn git_fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let repo = dir.path();
    git(repo, &["init", "-q"], "x@example.org");
    commit(repo, "A.java", 5, "Early@Example.org", "seed");
    commit(repo, "Other.java", 1, "early@example.org", "other");
    git(repo, &["tag", "v1"], "x@example.org");
    commit(repo, "A.java", 10, "alice@example.org", "one");
    commit(repo, "A.java", 20, "bob@example.org", "two");
    commit(repo, "A.java", 30, "ALICE@example.org", "three");
    git(repo, &["tag", "-a", "v2", "-m", "release"], "x@example.org");
    dir
}

/// Two-sided signed-rank p from the null distribution of 2·W⁺, built by
/// dynamic programming over doubled (integral) ranks.
pub fn wilcoxon_dp(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = d.len();
    let mut doubled = vec![0usize; n];
    for i in 0..n {
        let less = d.iter().filter(|y| y.abs() < d[i].abs()).count();
        let equal = d.iter().filter(|y| y.abs() == d[i].abs()).count();
        doubled[i] = 2 * less + equal + 1;
    }
    let total: usize = doubled.iter().sum();
    let mut ways = vec![0f64; total + 1];
    ways[0] = 1.0;
    for r in &doubled {
        for s in (*r..=total).rev() {
            ways[s] += ways[s - r];
        }
    }
    let w: usize = doubled.iter().zip(&d).filter(|(_, d)| **d > 0.0).map(|(r, _)| r).sum();
    let all = 2f64.powi(n as i32);
    let le: f64 = ways[..=w].iter().sum();
    let ge: f64 = ways[w..].iter().sum();
    (2.0 * le.min(ge) / all).min(1.0)
}

/// Share of dominating pairs minus share of dominated pairs.
pub fn cliffs_brute(a: &[f64], b: &[f64]) -> f64 {
    let mut dom = 0i64;
    for x in a {
        for y in b {
            dom += (x > y) as i64 - (x < y) as i64;
        }
    }
    dom as f64 / (a.len() * b.len()) as f64
}

/// Pair-counting form of the adjusted Rand index.
pub fn ari_pairs(a: &[usize], b: &[usize]) -> f64 {
    let (mut n11, mut n10, mut n01, mut n00) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => n11 += 1.0,
                (true, false) => n10 += 1.0,
                (false, true) => n01 += 1.0,
                (false, false) => n00 += 1.0,
            }
        }
    }
    2.0 * (n11 * n00 - n01 * n10) / ((n11 + n01) * (n01 + n00) + (n11 + n10) * (n10 + n00))
}

/// Mean silhouette straight from its definition; singletons score 0.
pub fn silhouette_brute(points: &[Vec<f64>], assign: &[usize]) -> f64 {
    let d = |i: usize, j: usize| -> f64 {
        points[i].iter().zip(&points[j]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    };
    let n = points.len();
    let labels: BTreeSet<usize> = assign.iter().copied().collect();
    let mut total = 0.0;
    for i in 0..n {
        let mates: Vec<usize> = (0..n).filter(|j| *j != i && assign[*j] == assign[i]).collect();
        if mates.is_empty() {
            continue;
        }
        let a = mates.iter().map(|j| d(i, *j)).sum::<f64>() / mates.len() as f64;
        let b = labels
            .iter()
            .filter(|l| **l != assign[i])
            .map(|l| {
                let m: Vec<usize> = (0..n).filter(|j| assign[*j] == *l).collect();
                m.iter().map(|j| d(i, *j)).sum::<f64>() / m.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        if a.max(b) > 0.0 {
            total += (b - a) / a.max(b);
        }
    }
    total / n as f64
}

/// P(score⁺ > score⁻) + ½ P(tie) over every positive/negative pair.
pub fn auc_pairs(labels: &[u8], scores: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, li) in labels.iter().enumerate() {
        for (j, lj) in labels.iter().enumerate() {
            if *li == 1 && *lj == 0 {
                den += 1.0;
                num += if scores[i] > scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    num / den
}

/// Expected tree output when only the features in `known` are observed:
/// unknown splits average their children by training cover.
fn conditional(tree: &Tree, node: usize, row: &[f64], known: u32) -> f64 {
    match tree.nodes[node] {
        Node::Leaf { value, .. } => value,
        Node::Split { feature, threshold, left, right, cover } => {
            if known & (1 << feature) != 0 {
                conditional(tree, if row[feature] <= threshold { left } else { right }, row, known)
            } else {
                let l = tree.nodes[left].cover() / cover;
                let r = tree.nodes[right].cover() / cover;
                l * conditional(tree, left, row, known) + r * conditional(tree, right, row, known)
            }
        }
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|v| v as f64).product()
}

/// Shapley values by enumerating every coalition.
pub fn shap_brute_force(tree: &Tree, row: &[f64], d: usize) -> Vec<f64> {
    let mut phi = vec![0.0; d];
    for (i, p) in phi.iter_mut().enumerate() {
        for s in 0u32..(1 << d) {
            if s & (1 << i) != 0 {
                continue;
            }
            let size = s.count_ones() as usize;
            let w = factorial(size) * factorial(d - size - 1) / factorial(d);
            *p += w * (conditional(tree, 0, row, s | (1 << i)) - conditional(tree, 0, row, s));
        }
    }
    phi
}
