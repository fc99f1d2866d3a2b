use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{prepare_run_dir, table_path, write_json, ReleaseFailure, StudyConfig, StudyError};
use crate::dataset::{
    assemble_feature_table, export_csv, ingest_defect_labels, ingest_published_metrics, FeatureTable, JoinStats,
    ReleaseSpec,
};
use crate::java::{normalize_path, read_release, OriginPolicy};
use crate::ku::detect_release;
use crate::metrics::{compute_process_metrics, compute_release_product_metrics, mine_history, ProcessMetrics, Window};

/// Per-release bookkeeping written next to each table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractReport {
    pub release: String,
    pub files: usize,
    pub unreadable: Vec<String>,
    pub parse_failures: usize,
    pub join: JoinStats,
    pub duplicate_labels: Vec<String>,
    pub process_metrics: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExtractOutcome {
    pub written: Vec<ExtractReport>,
    pub failures: Vec<ReleaseFailure>,
}

fn process_for(spec: &ReleaseSpec, paths: &[String]) -> Result<BTreeMap<String, ProcessMetrics>, StudyError> {
    let Some(repo) = &spec.repository else {
        return Ok(BTreeMap::new());
    };
    // Table paths are relative to the source root; history paths to the
    // repository root.
    let prefix = spec.source_root.strip_prefix(repo).map(|p| normalize_path(&p.to_string_lossy())).unwrap_or_default();
    let join = |p: &str| if prefix.is_empty() { p.to_string() } else { format!("{prefix}/{p}") };
    let history = mine_history(repo).map_err(|e| StudyError::Missing(e.to_string()))?;
    let window = Window { release_tag: spec.release_tag.clone(), previous_tag: spec.previous_tag.clone() };
    let repo_paths: Vec<String> = paths.iter().map(|p| join(p)).collect();
    let metrics =
        compute_process_metrics(&history, &window, &repo_paths).map_err(|e| StudyError::Missing(e.to_string()))?;
    Ok(paths.iter().filter_map(|p| metrics.get(&join(p)).map(|m| (p.clone(), *m))).collect())
}

/// Builds the feature table of one release from its sources and labels.
pub fn extract_release(cfg: &StudyConfig, spec: &ReleaseSpec) -> Result<(FeatureTable, ExtractReport), StudyError> {
    let id = spec.release_id();
    if !spec.label_file.is_file() {
        return Err(StudyError::Missing(format!("label file {} not found", spec.label_file.display())));
    }
    let (units, unreadable) = read_release(&spec.source_root, &id)?;
    let kus = detect_release(&units, OriginPolicy { favor_recall: cfg.extract.favor_recall })
        .map_err(|e| StudyError::Missing(format!("{id}: {e}")))?;
    let product = compute_release_product_metrics(&units);
    let paths: Vec<String> = units.iter().map(|u| u.path.clone()).collect();
    let process = process_for(spec, &paths)?;
    let labels = ingest_defect_labels(&spec.label_file, &cfg.extract.label_columns())?;
    let vectors = kus.files.iter().map(|(p, f)| (p.clone(), f.vector)).collect();
    let (mut table, join) = assemble_feature_table(&id, &vectors, &product, &process, &labels.labels)?;
    if cfg.extract.use_published_metrics {
        let published = ingest_published_metrics(&spec.label_file, &cfg.extract.label_path_column)?;
        table = table.with_published(&published);
    }
    let report = ExtractReport {
        release: id,
        files: units.len(),
        unreadable: unreadable.iter().map(|e| e.to_string()).collect(),
        parse_failures: kus.parse_failures(),
        join,
        duplicate_labels: labels.duplicates,
        process_metrics: spec.repository.is_some(),
    };
    Ok((table, report))
}

/// Extracts every release in parallel. A failing release is recorded in
/// `tables/extract_errors.json` and does not stop the others.
pub fn run_extract(cfg: &StudyConfig) -> Result<ExtractOutcome, StudyError> {
    let dir = prepare_run_dir(cfg)?;
    std::fs::create_dir_all(dir.join("tables"))?;
    let results: Vec<Result<ExtractReport, ReleaseFailure>> = cfg
        .releases
        .par_iter()
        .map(|spec| {
            let id = spec.release_id();
            let fail = |e: StudyError| ReleaseFailure { release: id.clone(), error: e.to_string() };
            let (table, report) = extract_release(cfg, spec).map_err(fail)?;
            export_csv(&table, &table_path(&dir, &id)).map_err(|e| fail(e.into()))?;
            write_json(&dir.join("tables").join(format!("{id}.join.json")), &report).map_err(fail)?;
            Ok(report)
        })
        .collect();
    let mut out = ExtractOutcome::default();
    for r in results {
        match r {
            Ok(rep) => out.written.push(rep),
            Err(f) => {
                log::error!("{}: {}", f.release, f.error);
                // A table left by an earlier run would no longer match its inputs.
                let _ = std::fs::remove_file(table_path(&dir, &f.release));
                out.failures.push(f);
            }
        }
    }
    write_json(&dir.join("tables").join("extract_errors.json"), &out.failures)?;
    Ok(out)
}
