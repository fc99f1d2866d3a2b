//! Per-release feature tables: KU counts, code metrics, and defect labels
//! joined on normalized file paths.

mod io;

pub use io::{export_csv, export_jsonl, import_csv, import_jsonl};

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::java::normalize_path;
use crate::ku::{KuVector, KU_COUNT};
use crate::metrics::{ProcessMetrics, ProductMetrics, EXTRA_METRIC_NAMES, PROCESS_METRIC_NAMES, PRODUCT_METRIC_NAMES};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{file}: missing column {column}")]
    MissingColumn { file: String, column: String },
    #[error("{file}: cannot read label {value:?} for {path}")]
    InvalidLabel { file: String, path: String, value: String },
    #[error("no labeled file of release {0} was found in the source snapshot")]
    EmptyJoin(String),
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("duplicate row {0}")]
    DuplicateRow(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// One release to study.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseSpec {
    pub project: String,
    pub release_tag: String,
    #[serde(default)]
    pub previous_tag: Option<String>,
    pub source_root: PathBuf,
    pub label_file: PathBuf,
    /// Git repository for process metrics. Without one, process metrics come
    /// from the label file or are missing.
    #[serde(default)]
    pub repository: Option<PathBuf>,
}

impl ReleaseSpec {
    pub fn release_id(&self) -> String {
        format!("{}-{}", self.project, self.release_tag)
    }
}

/// Header names in a label file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelColumns {
    pub path: String,
    pub defect: String,
}

impl Default for LabelColumns {
    /// The layout of the published defect dataset.
    fn default() -> Self {
        LabelColumns { path: "File".into(), defect: "RealBug".into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Labels {
    pub labels: BTreeMap<String, u8>,
    /// Paths listed more than once; the first row was kept.
    pub duplicates: Vec<String>,
}

fn parse_label(value: &str) -> Option<u8> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "t" | "y" => Some(1),
        "false" | "no" | "f" | "n" => Some(0),
        other => other.parse::<f64>().ok().filter(|v| v.is_finite() && *v >= 0.0).map(|v| (v > 0.0) as u8),
    }
}

fn column_index(headers: &csv::StringRecord, name: &str, file: &Path) -> Result<usize, DatasetError> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| DatasetError::MissingColumn { file: file.display().to_string(), column: name.to_string() })
}

/// Reads file paths and binary defect labels. Counts above zero are defective.
pub fn ingest_defect_labels(csv_path: &Path, columns: &LabelColumns) -> Result<Labels, DatasetError> {
    let mut reader = csv::Reader::from_path(csv_path)?;
    let headers = reader.headers()?.clone();
    let pi = column_index(&headers, &columns.path, csv_path)?;
    let di = column_index(&headers, &columns.defect, csv_path)?;
    let mut out = Labels::default();
    for record in reader.records() {
        let record = record?;
        let path = normalize_path(record.get(pi).unwrap_or(""));
        let raw = record.get(di).unwrap_or("");
        let label = parse_label(raw).ok_or_else(|| DatasetError::InvalidLabel {
            file: csv_path.display().to_string(),
            path: path.clone(),
            value: raw.to_string(),
        })?;
        match out.labels.entry(path) {
            std::collections::btree_map::Entry::Occupied(e) => {
                log::warn!("{}: duplicate path {}, keeping the first row", csv_path.display(), e.key());
                out.duplicates.push(e.key().clone());
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(label);
            }
        }
    }
    Ok(out)
}

/// Metric columns shipped in a label file, by path. Only columns named like
/// our metrics are read; unparseable cells are skipped.
pub fn ingest_published_metrics(
    csv_path: &Path,
    path_column: &str,
) -> Result<BTreeMap<String, BTreeMap<String, f64>>, DatasetError> {
    let mut reader = csv::Reader::from_path(csv_path)?;
    let headers = reader.headers()?.clone();
    let pi = column_index(&headers, path_column, csv_path)?;
    let known: BTreeSet<&str> = cc_columns().into_iter().chain(EXTRA_METRIC_NAMES).collect();
    let wanted: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| known.contains(h.trim()))
        .map(|(i, h)| (i, h.trim().to_string()))
        .collect();
    let mut out = BTreeMap::new();
    for record in reader.records() {
        let record = record?;
        let path = normalize_path(record.get(pi).unwrap_or(""));
        let values = wanted
            .iter()
            .filter_map(|(i, name)| Some((name.clone(), record.get(*i)?.trim().parse::<f64>().ok()?)))
            .collect();
        out.entry(path).or_insert(values);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    Count,
    Real,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

/// Kind implied by a column name: KU counts and Count*/Max*/Sum* metrics are
/// counts; averages, ratios, and normalized churn are real.
pub fn column_kind(name: &str) -> ColumnKind {
    let real = name.starts_with("Avg")
        || name.starts_with("Ratio")
        || name.starts_with("Percent")
        || name.ends_with("_Median")
        || name.ends_with("_Mean")
        || name == "ADDED_LINES"
        || name == "DEL_LINES";
    if real {
        ColumnKind::Real
    } else {
        ColumnKind::Count
    }
}

pub fn ku_columns() -> Vec<String> {
    KuVector::column_names()
}

/// The 59 code-metric columns: 54 product then 5 process.
pub fn cc_columns() -> Vec<&'static str> {
    PRODUCT_METRIC_NAMES.iter().chain(PROCESS_METRIC_NAMES.iter()).copied().collect()
}

/// All feature columns of an assembled table: 28 KU, 59 code metrics, then
/// the 4 method-level means.
pub fn full_schema() -> Vec<Column> {
    ku_columns()
        .into_iter()
        .chain(cc_columns().into_iter().map(str::to_string))
        .chain(EXTRA_METRIC_NAMES.iter().map(|s| s.to_string()))
        .map(|name| Column { kind: column_kind(&name), name })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowFlags {
    pub parse_failed: bool,
    pub npath_capped: bool,
    /// Labeled but absent from the source snapshot; all features are missing.
    pub missing_features: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub release_id: String,
    pub path: String,
    /// NaN marks a missing value.
    pub values: Vec<f64>,
    pub defect: u8,
    pub flags: RowFlags,
}

impl Row {
    fn key(&self) -> (&str, &str) {
        (&self.release_id, &self.path)
    }
}

/// Rows sorted by (release, path), all sharing one fixed schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureTable {
    columns: Vec<Column>,
    rows: Vec<Row>,
}

impl PartialEq for FeatureTable {
    /// Bitwise on values so that missing markers compare equal.
    fn eq(&self, other: &Self) -> bool {
        self.columns == other.columns
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| {
                a.release_id == b.release_id
                    && a.path == b.path
                    && a.defect == b.defect
                    && a.flags == b.flags
                    && a.values.len() == b.values.len()
                    && a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits())
            })
    }
}

impl FeatureTable {
    /// Checks row widths, labels, and key uniqueness, then sorts rows.
    pub fn new(columns: Vec<Column>, mut rows: Vec<Row>) -> Result<Self, DatasetError> {
        let names: BTreeSet<&str> = columns.iter().map(|c| c.name.as_str()).collect();
        if names.len() != columns.len() {
            return Err(DatasetError::SchemaMismatch("duplicate column names".into()));
        }
        for r in &rows {
            if r.values.len() != columns.len() {
                return Err(DatasetError::SchemaMismatch(format!(
                    "row {} has {} values for {} columns",
                    r.path,
                    r.values.len(),
                    columns.len()
                )));
            }
            if r.defect > 1 {
                return Err(DatasetError::SchemaMismatch(format!("row {} has label {}", r.path, r.defect)));
            }
        }
        rows.sort_by(|a, b| a.key().cmp(&b.key()));
        if let Some(w) = rows.windows(2).find(|w| w[0].key() == w[1].key()) {
            return Err(DatasetError::DuplicateRow(format!("{}:{}", w[0].release_id, w[0].path)));
        }
        Ok(FeatureTable { columns, rows })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows usable for training: those with features.
    pub fn usable_rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.flags.missing_features)
    }

    /// Feature matrix and labels of the usable rows. Remaining missing values
    /// are replaced by `fill`.
    pub fn matrix(&self, fill: f64) -> (Vec<Vec<f64>>, Vec<u8>) {
        self.usable_rows()
            .map(|r| {
                let x = r.values.iter().map(|v| if v.is_nan() { fill } else { *v }).collect();
                (x, r.defect)
            })
            .unzip()
    }

    pub fn column_values(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        Some(self.usable_rows().map(|r| r.values[i]).collect())
    }

    /// Rows of several tables with the same schema.
    pub fn concat(tables: &[FeatureTable]) -> Result<FeatureTable, DatasetError> {
        let Some(first) = tables.first() else {
            return FeatureTable::new(Vec::new(), Vec::new());
        };
        if tables.iter().any(|t| t.columns != first.columns) {
            return Err(DatasetError::SchemaMismatch("tables have different columns".into()));
        }
        FeatureTable::new(first.columns.clone(), tables.iter().flat_map(|t| t.rows.clone()).collect())
    }

    /// Replaces values by those published for the same path and column.
    pub fn with_published(mut self, published: &BTreeMap<String, BTreeMap<String, f64>>) -> Self {
        for r in &mut self.rows {
            if r.flags.missing_features {
                continue;
            }
            if let Some(values) = published.get(&r.path) {
                for (name, v) in values {
                    if let Some(i) = self.columns.iter().position(|c| &c.name == name) {
                        r.values[i] = *v;
                    }
                }
            }
        }
        self
    }
}

/// Counts from a join.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct JoinStats {
    pub labeled: usize,
    pub matched: usize,
    /// Labeled files absent from the source snapshot.
    pub missing_features: usize,
    /// Source files without a label.
    pub unlabeled_dropped: usize,
    /// Matched files with no process metrics.
    pub missing_process: usize,
}

/// Inner join on the label paths. Labeled files without features are kept
/// and flagged; feature rows without a label are dropped and counted.
pub fn assemble_feature_table(
    release_id: &str,
    ku: &BTreeMap<String, KuVector>,
    product: &BTreeMap<String, ProductMetrics>,
    process: &BTreeMap<String, ProcessMetrics>,
    labels: &BTreeMap<String, u8>,
) -> Result<(FeatureTable, JoinStats), DatasetError> {
    let columns = full_schema();
    let width = columns.len();
    let mut stats = JoinStats { labeled: labels.len(), ..JoinStats::default() };
    let sources: BTreeSet<&String> = ku.keys().chain(product.keys()).collect();
    stats.unlabeled_dropped = sources.iter().filter(|p| !labels.contains_key(**p)).count();
    let mut rows = Vec::with_capacity(labels.len());
    for (path, defect) in labels {
        let mut row = Row {
            release_id: release_id.to_string(),
            path: path.clone(),
            values: vec![f64::NAN; width],
            defect: *defect,
            flags: RowFlags::default(),
        };
        match (ku.get(path), product.get(path)) {
            (Some(k), Some(p)) => {
                stats.matched += 1;
                for (i, c) in k.counts.iter().enumerate() {
                    row.values[i] = *c as f64;
                }
                let base = KU_COUNT;
                row.values[base..base + PRODUCT_METRIC_NAMES.len()].copy_from_slice(&p.values);
                let extras = base + PRODUCT_METRIC_NAMES.len() + PROCESS_METRIC_NAMES.len();
                row.values[extras..].copy_from_slice(&p.extras);
                row.flags.parse_failed = p.parse_failed;
                row.flags.npath_capped = p.npath_capped;
                match process.get(path) {
                    Some(m) => {
                        let start = base + PRODUCT_METRIC_NAMES.len();
                        row.values[start..start + 5].copy_from_slice(&m.values);
                    }
                    None => stats.missing_process += 1,
                }
            }
            _ => {
                stats.missing_features += 1;
                row.flags.missing_features = true;
            }
        }
        rows.push(row);
    }
    if stats.matched == 0 {
        return Err(DatasetError::EmptyJoin(release_id.to_string()));
    }
    Ok((FeatureTable::new(columns, rows)?, stats))
}

/// Named column subsets used by the models.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureSet {
    /// The 28 KU counts.
    Ku,
    /// The 54 product metrics.
    Prod,
    /// Product and process metrics, 59 columns.
    ProdProc,
    /// KU counts and all code metrics, 87 columns.
    KuCc,
    /// The ten-feature cost-effective subset.
    CostEff10,
    Custom(Vec<String>),
}

/// Members of [`FeatureSet::CostEff10`].
pub const COST_EFF10: [&str; 10] =
    ["K6", "K5", "K11", "K7", "K4", "CountClassCoupled", "CountLineComment", "MaxNesting_Mean", "DDEV", "ADDED_LINES"];

impl FeatureSet {
    pub fn columns(&self) -> Vec<String> {
        let own = |v: Vec<&str>| v.into_iter().map(str::to_string).collect();
        match self {
            FeatureSet::Ku => ku_columns(),
            FeatureSet::Prod => own(PRODUCT_METRIC_NAMES.to_vec()),
            FeatureSet::ProdProc => own(cc_columns()),
            FeatureSet::KuCc => ku_columns().into_iter().chain(own(cc_columns())).collect(),
            FeatureSet::CostEff10 => own(COST_EFF10.to_vec()),
            FeatureSet::Custom(c) => c.clone(),
        }
    }
}

/// A table restricted to the columns of `set`, in the set's order.
pub fn select_columns(table: &FeatureTable, set: &FeatureSet) -> Result<FeatureTable, DatasetError> {
    let names = set.columns();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| table.column_index(n).ok_or_else(|| DatasetError::UnknownColumn(n.clone())))
        .collect::<Result<_, _>>()?;
    let columns = idx.iter().map(|i| table.columns[*i].clone()).collect();
    let rows =
        table.rows.iter().map(|r| Row { values: idx.iter().map(|i| r.values[*i]).collect(), ..r.clone() }).collect();
    FeatureTable::new(columns, rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(csv: &str) -> Result<Labels, DatasetError> {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels.csv");
        std::fs::write(&p, csv).unwrap();
        ingest_defect_labels(&p, &LabelColumns::default())
    }

    #[test]
    fn labels_are_binary_and_paths_normalized() {
        let l = labels("File,RealBug\na.java,true\nb.java,false\n.\\src\\C.java,3\n").unwrap();
        assert_eq!(l.labels["a.java"], 1);
        assert_eq!(l.labels["b.java"], 0);
        assert_eq!(l.labels["src/C.java"], 1);
    }

    #[test]
    fn duplicate_paths_keep_the_first_row() {
        let l = labels("File,RealBug\na.java,1\na.java,0\n").unwrap();
        assert_eq!(l.labels["a.java"], 1);
        assert_eq!(l.duplicates, vec!["a.java".to_string()]);
    }

    #[test]
    fn label_errors() {
        assert!(matches!(labels("Path,Bug\na,1\n"), Err(DatasetError::MissingColumn { .. })));
        assert!(matches!(labels("File,RealBug\na,maybe\n"), Err(DatasetError::InvalidLabel { .. })));
    }

    fn product(seed: f64) -> ProductMetrics {
        let mut p = ProductMetrics::lines_only("");
        p.parse_failed = false;
        p.values.iter_mut().enumerate().for_each(|(i, v)| *v = seed + i as f64);
        p
    }

    fn sources(paths: &[&str]) -> (BTreeMap<String, KuVector>, BTreeMap<String, ProductMetrics>) {
        let ku = paths.iter().map(|p| (p.to_string(), KuVector::default())).collect();
        let prod = paths.iter().map(|p| (p.to_string(), product(1.0))).collect();
        (ku, prod)
    }

    #[test]
    fn join_drops_unlabeled_and_flags_missing() {
        let lab: BTreeMap<String, u8> = [("a".to_string(), 1), ("b".to_string(), 0)].into();
        let (ku, prod) = sources(&["a", "b", "c"]);
        let (t, s) = assemble_feature_table("r", &ku, &prod, &BTreeMap::new(), &lab).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(s.unlabeled_dropped, 1);

        let (ku, prod) = sources(&["a"]);
        let (t, s) = assemble_feature_table("r", &ku, &prod, &BTreeMap::new(), &lab).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(s.missing_features, 1);
        assert!(t.rows()[1].flags.missing_features);
        assert!(t.rows()[1].values.iter().all(|v| v.is_nan()));
        assert_eq!(t.usable_rows().count(), 1);

        let (ku, prod) = sources(&["z"]);
        assert!(matches!(
            assemble_feature_table("r", &ku, &prod, &BTreeMap::new(), &lab),
            Err(DatasetError::EmptyJoin(_))
        ));
    }

    #[test]
    fn feature_set_widths() {
        let lab: BTreeMap<String, u8> = [("a".to_string(), 1)].into();
        let (ku, prod) = sources(&["a"]);
        let (t, _) = assemble_feature_table("r", &ku, &prod, &BTreeMap::new(), &lab).unwrap();
        assert_eq!(t.columns().len(), 28 + 59 + 4);
        for (set, n) in [
            (FeatureSet::Ku, 28),
            (FeatureSet::Prod, 54),
            (FeatureSet::ProdProc, 59),
            (FeatureSet::KuCc, 87),
            (FeatureSet::CostEff10, 10),
        ] {
            assert_eq!(select_columns(&t, &set).unwrap().columns().len(), n, "{set:?}");
        }
        assert!(matches!(
            select_columns(&t, &FeatureSet::Custom(vec!["Nope".into()])),
            Err(DatasetError::UnknownColumn(_))
        ));
    }

    #[test]
    fn duplicate_keys_are_rejected() {
        let row =
            Row { release_id: "r".into(), path: "a".into(), values: vec![], defect: 0, flags: RowFlags::default() };
        assert!(matches!(FeatureTable::new(vec![], vec![row.clone(), row]), Err(DatasetError::DuplicateRow(_))));
    }

    #[test]
    fn published_values_override_computed_ones() {
        let lab: BTreeMap<String, u8> = [("a".to_string(), 1)].into();
        let (ku, prod) = sources(&["a"]);
        let (t, _) = assemble_feature_table("r", &ku, &prod, &BTreeMap::new(), &lab).unwrap();
        let published = [("a".to_string(), [("DDEV".to_string(), 7.0)].into())].into();
        let t = t.with_published(&published);
        assert_eq!(t.column_values("DDEV").unwrap(), vec![7.0]);
    }
}
