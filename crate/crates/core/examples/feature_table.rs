//! Join KU counts, product metrics, and defect labels into one feature table,
//! then write it to CSV and read it back.
//!
//!     cargo run --example feature_table

use std::collections::BTreeMap;

use kunits::dataset::{assemble_feature_table, export_csv, full_schema, import_csv, select_columns, FeatureSet};
use kunits::java::{OriginPolicy, SourceUnit};
use kunits::ku::detect_release;
use kunits::metrics::compute_release_product_metrics;

fn class(name: &str, loops: usize) -> String {
    let body: String =
        (0..loops).map(|i| format!("        for (int i{i} = 0; i{i} < n; i{i}++) s += i{i};\n")).collect();
    format!("package demo;\n\npublic class {name} {{\n    int sum(int n) {{\n        int s = 0;\n{body}        return s;\n    }}\n}}\n")
}

pub fn run_example() -> anyhow::Result<String> {
    let units: Vec<SourceUnit> =
        (0..6).map(|i| SourceUnit::new("demo-1.0", format!("demo/C{i}.java"), class(&format!("C{i}"), i))).collect();
    let kus = detect_release(&units, OriginPolicy::default())?;
    let ku: BTreeMap<_, _> = kus.files.iter().map(|(p, f)| (p.clone(), f.vector)).collect();
    let product = compute_release_product_metrics(&units);
    // The label file may list files that are not in the snapshot.
    let labels: BTreeMap<String, u8> = (0..7).map(|i| (format!("demo/C{i}.java"), (i >= 3) as u8)).collect();

    let (table, join) = assemble_feature_table("demo-1.0", &ku, &product, &BTreeMap::new(), &labels)?;
    let mut out = format!(
        "{} rows x {} columns; matched {}, missing features {}, no process metrics {}\n",
        table.len(),
        table.columns().len(),
        join.matched,
        join.missing_features,
        join.missing_process
    );

    let small = select_columns(&table, &FeatureSet::Custom(vec!["K4".into(), "SumCyclomatic".into()]))?;
    for row in small.rows() {
        out.push_str(&format!("{:<16}{:?} defect={}\n", row.path, row.values, row.defect));
    }

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("demo-1.0.csv");
    export_csv(&table, &path)?;
    let back = import_csv(&path, Some(&full_schema()))?;
    out.push_str(&format!("round trip identical: {}\n", back == table));
    Ok(out)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
