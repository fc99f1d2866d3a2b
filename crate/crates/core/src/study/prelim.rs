use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{load_tables, median, prepare_run_dir, release_seed, write_json, ReleaseFailure, StudyConfig, StudyError};
use crate::dataset::{cc_columns, ku_columns, FeatureTable};
use crate::learner::Samples;
use crate::stats::{
    adjusted_rand_index, choose_k, cluster_overlap_report, pca_reduce, spearman_rho, strength_of, CorrelationStrength,
    OverlapReport,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRho {
    pub ku: String,
    pub metric: String,
    /// None when either column is constant over the pooled rows.
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthBin {
    pub strength: CorrelationStrength,
    pub kus: usize,
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KuStrength {
    pub ku: String,
    pub metric: String,
    pub rho: f64,
    pub strength: CorrelationStrength,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationSummary {
    #[serde(skip)]
    pub pairs: Vec<PairRho>,
    /// Strongest code-metric correlation of every KU that varies.
    pub per_ku: Vec<KuStrength>,
    /// Share of those KUs per strength category, strongest first.
    pub histogram: Vec<StrengthBin>,
    pub degenerate_pairs: usize,
}

/// Spearman ρ of every KU column against every code-metric column over the
/// pooled usable rows; rows missing either value are left out of that pair.
/// A KU is binned by its strongest |ρ|.
pub fn ku_metric_correlations(tables: &[&FeatureTable]) -> Result<CorrelationSummary, StudyError> {
    let column =
        |name: &str| -> Vec<f64> { tables.iter().flat_map(|t| t.column_values(name).unwrap_or_default()).collect() };
    let kus = ku_columns();
    let metrics: Vec<String> = cc_columns().into_iter().map(str::to_string).collect();
    let metric_values: Vec<Vec<f64>> = metrics.iter().map(|m| column(m)).collect();
    let pairs: Vec<PairRho> = kus
        .par_iter()
        .flat_map_iter(|ku| {
            let kv = column(ku);
            metrics
                .iter()
                .zip(&metric_values)
                .map(move |(m, mv)| {
                    let (a, b): (Vec<f64>, Vec<f64>) = kv
                        .iter()
                        .zip(mv)
                        .filter(|(x, y)| x.is_finite() && y.is_finite())
                        .map(|(x, y)| (*x, *y))
                        .unzip();
                    let rho = spearman_rho(&a, &b).ok().filter(|s| !s.degenerate).map(|s| s.rho);
                    PairRho { ku: ku.clone(), metric: m.clone(), rho }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut per_ku: Vec<KuStrength> = Vec::new();
    for ku in &kus {
        let best = pairs
            .iter()
            .filter(|p| &p.ku == ku)
            .filter_map(|p| p.rho.map(|r| (p, r)))
            .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.metric.cmp(&a.0.metric)));
        if let Some((p, rho)) = best {
            per_ku.push(KuStrength { ku: ku.clone(), metric: p.metric.clone(), rho, strength: strength_of(rho) });
        }
    }
    let histogram = CorrelationStrength::ALL
        .iter()
        .rev()
        .map(|s| {
            let kus = per_ku.iter().filter(|k| k.strength == *s).count();
            let percent = if per_ku.is_empty() { 0.0 } else { 100.0 * kus as f64 / per_ku.len() as f64 };
            StrengthBin { strength: *s, kus, percent }
        })
        .collect();
    let degenerate_pairs = pairs.iter().filter(|p| p.rho.is_none()).count();
    Ok(CorrelationSummary { pairs, per_ku, histogram, degenerate_pairs })
}

/// PCA and k-means of one feature space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceClusters {
    pub components: usize,
    pub explained: f64,
    pub k: usize,
    /// Mean silhouette per candidate k.
    pub silhouette: Vec<(usize, Option<f64>)>,
    #[serde(skip)]
    pub assignment: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReleasePrelim {
    pub release: String,
    pub rows: usize,
    pub ku: SpaceClusters,
    pub cm: SpaceClusters,
    pub ari: f64,
    pub overlap: OverlapReport,
}

fn cluster_space(rows: &[Vec<f64>], cfg: &StudyConfig, seed: u64) -> Result<SpaceClusters, StudyError> {
    let t = &cfg.thresholds;
    let pca = pca_reduce(rows, t.pca_variance)?;
    let chosen = choose_k(&pca.scores, t.k_min..=t.k_max, seed)?;
    Ok(SpaceClusters {
        components: pca.n_components,
        explained: pca.explained[..pca.n_components].iter().sum(),
        k: chosen.k,
        silhouette: chosen.scores,
        assignment: chosen.clustering.assignment,
    })
}

/// Clusters one release in KU space and in code-metric space and compares
/// the two partitions.
pub fn prelim_release(
    release: &str,
    ku_rows: &[Vec<f64>],
    cm_rows: &[Vec<f64>],
    cfg: &StudyConfig,
) -> Result<ReleasePrelim, StudyError> {
    let seed = release_seed(cfg.seed, release);
    let ku = cluster_space(ku_rows, cfg, seed)?;
    let cm = cluster_space(cm_rows, cfg, seed)?;
    Ok(ReleasePrelim {
        release: release.to_string(),
        rows: ku_rows.len(),
        ari: adjusted_rand_index(&ku.assignment, &cm.assignment)?,
        overlap: cluster_overlap_report(&ku.assignment, &cm.assignment)?,
        ku,
        cm,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrelimReport {
    pub correlations: CorrelationSummary,
    pub releases: Vec<ReleasePrelim>,
    pub median_ari: Option<f64>,
    pub failures: Vec<ReleaseFailure>,
}

fn write_correlations(path: &std::path::Path, c: &CorrelationSummary) -> Result<(), StudyError> {
    let mut w = csv::Writer::from_path(path).map_err(std::io::Error::from)?;
    w.write_record(["ku", "metric", "rho", "strength"]).map_err(std::io::Error::from)?;
    for p in &c.pairs {
        let (rho, s) = match p.rho {
            Some(r) => (r.to_string(), format!("{:?}", strength_of(r))),
            None => (String::new(), "degenerate".into()),
        };
        w.write_record([p.ku.as_str(), &p.metric, &rho, &s]).map_err(std::io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

fn write_strength(path: &std::path::Path, c: &CorrelationSummary) -> Result<(), StudyError> {
    let mut w = csv::Writer::from_path(path).map_err(std::io::Error::from)?;
    w.write_record(["strength", "kus", "percent"]).map_err(std::io::Error::from)?;
    for b in &c.histogram {
        w.write_record([format!("{:?}", b.strength), b.kus.to_string(), format!("{:.1}", b.percent)])
            .map_err(std::io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

fn write_clusters(path: &std::path::Path, paths: &[String], r: &ReleasePrelim) -> Result<(), StudyError> {
    let mut w = csv::Writer::from_path(path).map_err(std::io::Error::from)?;
    w.write_record(["path", "ku_cluster", "cm_cluster"]).map_err(std::io::Error::from)?;
    for (i, p) in paths.iter().enumerate() {
        w.write_record([p.clone(), r.ku.assignment[i].to_string(), r.cm.assignment[i].to_string()])
            .map_err(std::io::Error::from)?;
    }
    w.flush()?;
    Ok(())
}

/// Correlation strengths, per-release clusterings, adjusted Rand indices,
/// and overlap reports, written under `prelim/`.
pub fn run_prelim(cfg: &StudyConfig) -> Result<PrelimReport, StudyError> {
    let dir = prepare_run_dir(cfg)?.join("prelim");
    std::fs::create_dir_all(dir.join("clusters"))?;
    let (tables, mut failures) = load_tables(cfg);
    if tables.is_empty() {
        return Err(StudyError::Missing("no extracted tables".into()));
    }
    let refs: Vec<&FeatureTable> = tables.iter().map(|t| &t.1).collect();
    let correlations = ku_metric_correlations(&refs)?;
    let ku_names = ku_columns();
    let cm_names: Vec<String> = cc_columns().into_iter().map(str::to_string).collect();
    let outcomes: Vec<Result<(ReleasePrelim, Vec<String>), ReleaseFailure>> = tables
        .par_iter()
        .map(|(id, table)| {
            let fail = |e: StudyError| ReleaseFailure { release: id.clone(), error: e.to_string() };
            let s = Samples::from_table(table);
            let ku = s.select(&ku_names).map_err(|e| fail(e.into()))?;
            let cm = s.select(&cm_names).map_err(|e| fail(e.into()))?;
            let r = prelim_release(id, &ku.x, &cm.x, cfg).map_err(fail)?;
            Ok((r, table.usable_rows().map(|r| r.path.clone()).collect()))
        })
        .collect();
    let mut releases = Vec::new();
    for o in outcomes {
        match o {
            Ok((r, paths)) => {
                write_clusters(&dir.join("clusters").join(format!("{}.csv", r.release)), &paths, &r)?;
                releases.push(r);
            }
            Err(f) => failures.push(f),
        }
    }
    let aris: Vec<f64> = releases.iter().map(|r| r.ari).collect();
    let report = PrelimReport { median_ari: median(&aris), correlations, releases, failures };
    write_correlations(&dir.join("correlations.csv"), &report.correlations)?;
    write_strength(&dir.join("strength.csv"), &report.correlations)?;
    write_json(&dir.join("summary.json"), &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg() -> StudyConfig {
        StudyConfig::from_toml("seed = 3\n[thresholds]\nk_max = 8\n", std::path::Path::new("/")).unwrap()
    }

    fn blobs(rng: &mut ChaCha8Rng, n: usize, d: usize, centers: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| (0..d).map(|j| ((i % centers) * (j + 1)) as f64 * 10.0 + rng.random::<f64>()).collect())
            .collect()
    }

    #[test]
    fn identical_spaces_agree_fully() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows = blobs(&mut rng, 60, 4, 3);
        let r = prelim_release("r", &rows, &rows, &cfg()).unwrap();
        assert_eq!(r.ari, 1.0);
        assert_eq!(r.overlap.non_overlapped_pct, 0.0);
    }

    #[test]
    fn unrelated_spaces_barely_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let ku = blobs(&mut rng, 240, 3, 4);
        // Cluster membership of the second space is independent of the first.
        let cm: Vec<Vec<f64>> = (0..240)
            .map(|_| {
                let c = rng.random_range(0..3) as f64 * 10.0;
                (0..3).map(|_| c + rng.random::<f64>()).collect()
            })
            .collect();
        let r = prelim_release("r", &ku, &cm, &cfg()).unwrap();
        assert!(r.ari.abs() < 0.1, "{}", r.ari);
    }
}
