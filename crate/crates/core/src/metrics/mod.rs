//! Product metrics computed from syntax trees and process metrics mined from
//! version-control history.
//!
//! Metric names follow the Understand API names so tables join with
//! published datasets. The definitions used here are written out in the
//! README; they aim for a reproducible oracle rather than tool parity.

mod lines;
mod process;
mod product;

pub use lines::{classify_lines, LineKind, LineStats};
pub use process::{
    compute_process_metrics, mine_history, parse_numstat_log, CommitRecord, FileChange, History, ProcessError,
    ProcessMetrics, Window, PROCESS_METRIC_NAMES,
};
pub use product::{compute_product_metrics, compute_release_product_metrics, ProductMetrics};

use serde::{Deserialize, Serialize};

/// The 54 product metrics in canonical column order.
pub const PRODUCT_METRIC_NAMES: [&str; 54] = [
    "AvgCyclomatic",
    "AvgCyclomaticModified",
    "AvgCyclomaticStrict",
    "AvgEssential",
    "AvgLine",
    "AvgLineBlank",
    "AvgLineCode",
    "AvgLineComment",
    "CountDeclClass",
    "CountDeclClassMethod",
    "CountDeclClassVariable",
    "CountDeclFunction",
    "CountDeclInstanceMethod",
    "CountDeclInstanceVariable",
    "CountDeclMethod",
    "CountDeclMethodDefault",
    "CountDeclMethodPrivate",
    "CountDeclMethodProtected",
    "CountDeclMethodPublic",
    "CountLine",
    "CountLineBlank",
    "CountLineCode",
    "CountLineCodeDecl",
    "CountLineCodeExe",
    "CountLineComment",
    "CountSemicolon",
    "CountStmt",
    "CountStmtDecl",
    "CountStmtExe",
    "MaxCyclomatic",
    "MaxCyclomaticModified",
    "MaxCyclomaticStrict",
    "RatioCommentToCode",
    "SumCyclomatic",
    "SumCyclomaticModified",
    "SumCyclomaticStrict",
    "SumEssential",
    "CountClassCoupled",
    "CountClassDerived",
    "MaxInheritanceTree",
    "PercentLackOfCohesion",
    "CountDeclMethodAll",
    "CountInput_Min",
    "CountInput_Median",
    "CountInput_Max",
    "CountOutput_Min",
    "CountOutput_Median",
    "CountOutput_Max",
    "CountPath_Min",
    "CountPath_Median",
    "CountPath_Max",
    "MaxNesting_Min",
    "MaxNesting_Median",
    "MaxNesting_Max",
];

/// Mean aggregates of the method-level metrics, exported beside the canonical
/// columns.
pub const EXTRA_METRIC_NAMES: [&str; 4] = ["CountInput_Mean", "CountOutput_Mean", "CountPath_Mean", "MaxNesting_Mean"];

/// NPATH values saturate here.
pub const NPATH_CAP: f64 = 1e9;

pub fn product_metric_index(name: &str) -> Option<usize> {
    PRODUCT_METRIC_NAMES.iter().position(|n| *n == name)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Aggregate {
    Min,
    Mean,
    Median,
    Max,
}

/// Order statistic of per-method values. The flag is set when `values` is
/// empty, in which case the result is 0.
pub fn aggregate_method_level(values: &[f64], which: Aggregate) -> (f64, bool) {
    if values.is_empty() {
        return (0.0, true);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let out = match which {
        Aggregate::Min => v[0],
        Aggregate::Max => v[n - 1],
        Aggregate::Mean => v.iter().sum::<f64>() / n as f64,
        Aggregate::Median if n % 2 == 1 => v[n / 2],
        Aggregate::Median => (v[n / 2 - 1] + v[n / 2]) / 2.0,
    };
    (out, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aggregates() {
        assert_eq!(aggregate_method_level(&[3.0], Aggregate::Min), (3.0, false));
        assert_eq!(aggregate_method_level(&[3.0], Aggregate::Median), (3.0, false));
        assert_eq!(aggregate_method_level(&[3.0], Aggregate::Max), (3.0, false));
        assert_eq!(aggregate_method_level(&[1.0, 2.0, 10.0], Aggregate::Median).0, 2.0);
        let (mean, _) = aggregate_method_level(&[1.0, 2.0, 10.0], Aggregate::Mean);
        assert!((mean - 13.0 / 3.0).abs() < 1e-12);
        assert_eq!(aggregate_method_level(&[4.0, 1.0, 3.0, 2.0], Aggregate::Median).0, 2.5);
        assert_eq!(aggregate_method_level(&[], Aggregate::Max), (0.0, true));
    }

    #[test]
    fn names_are_unique() {
        let set: std::collections::BTreeSet<_> = PRODUCT_METRIC_NAMES.iter().collect();
        assert_eq!(set.len(), 54);
        assert_eq!(product_metric_index("SumEssential"), Some(36));
        assert_eq!(product_metric_index("CountClassCoupled"), Some(37));
    }
}
