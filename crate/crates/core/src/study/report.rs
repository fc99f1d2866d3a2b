use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{prepare_run_dir, read_json, write_json, PrelimReport, Rq, RqSummary, StudyConfig, StudyError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config_hash: String,
    pub prelim: Option<PrelimReport>,
    pub studies: BTreeMap<Rq, RqSummary>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |x| format!("{x:.3}"))
}

fn markdown(r: &Report) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# Study summary\n\nconfig `{}`\n", &r.config_hash[..12]);
    if let Some(p) = &r.prelim {
        let _ = writeln!(s, "## Preliminary study\n\n| strength | KUs | % |\n|---|---:|---:|");
        for b in &p.correlations.histogram {
            let _ = writeln!(s, "| {:?} | {} | {:.1} |", b.strength, b.kus, b.percent);
        }
        let _ = writeln!(s, "\n| release | KU k | CM k | ARI | non-overlapped % |\n|---|---:|---:|---:|---:|");
        for rel in &p.releases {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {:.3} | {:.1} |",
                rel.release, rel.ku.k, rel.cm.k, rel.ari, rel.overlap.non_overlapped_pct
            );
        }
        let _ = writeln!(s, "\nmedian ARI: {}\n", fmt_opt(p.median_ari));
    }
    for (rq, sum) in &r.studies {
        let _ = writeln!(s, "## {rq}\n");
        let labels: Vec<&String> = sum.medians.keys().collect();
        if !labels.is_empty() {
            let _ = write!(s, "| release |");
            for l in &labels {
                let _ = write!(s, " {l} |");
            }
            let _ = writeln!(s, "\n|---|{}", "---:|".repeat(labels.len()));
            for rel in &sum.releases {
                let _ = write!(s, "| {rel} |");
                for l in &labels {
                    let _ = write!(s, " {} |", fmt_opt(sum.medians[*l].get(rel).copied().flatten()));
                }
                let _ = writeln!(s);
            }
            let _ = writeln!(s);
        }
        if !sum.comparisons.is_empty() {
            let _ = writeln!(s, "| release | comparison | p | effect | improvement % |\n|---|---|---:|---|---:|");
            for c in &sum.comparisons {
                let _ = writeln!(
                    s,
                    "| {} | {} vs {} | {:.2e} | {} | {:.1} |",
                    c.release,
                    c.subject,
                    c.baseline,
                    c.p,
                    c.effect_label(),
                    c.improvement
                );
            }
            let _ = writeln!(s);
        }
        if !sum.model_ranks.is_empty() {
            let mut v: Vec<_> = sum.model_ranks.iter().collect();
            v.sort_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(b.0)));
            let ranks: Vec<String> = v.iter().map(|(m, r)| format!("{m} ({r})")).collect();
            let _ = writeln!(s, "model ranks: {}\n", ranks.join(", "));
        }
        for (model, table) in &sum.feature_ranks {
            let top: Vec<String> = table.ordered().iter().take(10).map(|(f, r)| format!("{f} ({r})")).collect();
            let _ = writeln!(s, "{model} top features: {}\n", top.join(", "));
        }
        for f in &sum.failures {
            let _ = writeln!(s, "failed: {} ({})", f.release, f.error);
        }
    }
    s
}

/// Gathers the summaries already on disk into `report/summary.md` and
/// `report/summary.json`.
pub fn run_report(cfg: &StudyConfig) -> Result<Report, StudyError> {
    let dir = prepare_run_dir(cfg)?;
    let prelim_path = dir.join("prelim").join("summary.json");
    let prelim = if prelim_path.exists() { Some(read_json(&prelim_path)?) } else { None };
    let mut studies = BTreeMap::new();
    for rq in Rq::ALL {
        let p = dir.join(rq.name()).join("summary.json");
        if p.exists() {
            studies.insert(rq, read_json(&p)?);
        }
    }
    if prelim.is_none() && studies.is_empty() {
        return Err(StudyError::Missing("nothing to report; run prelim or study first".into()));
    }
    let report = Report { config_hash: cfg.hash(), prelim, studies };
    write_json(&dir.join("report").join("summary.json"), &report)?;
    std::fs::write(dir.join("report").join("summary.md"), markdown(&report))?;
    Ok(report)
}
