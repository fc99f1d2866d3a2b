//! Table files.
//!
//! CSV: header `release,path,<feature columns>,parse_failed,npath_capped,
//! missing_features,defect`; numbers use the shortest text that parses back
//! to the same f64, missing values are `NA`, flags are `0`/`1`.
//!
//! JSON lines: a first line `{"columns":[{"name":..,"kind":..},..]}`, then
//! one object per row with `values` holding `null` for missing entries.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{column_kind, Column, DatasetError, FeatureTable, Row, RowFlags};

const KEY_COLUMNS: [&str; 2] = ["release", "path"];
const TAIL_COLUMNS: [&str; 4] = ["parse_failed", "npath_capped", "missing_features", "defect"];
const MISSING: &str = "NA";

fn number_text(v: f64) -> String {
    if v.is_nan() {
        MISSING.to_string()
    } else {
        format!("{v}")
    }
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn export_csv(table: &FeatureTable, path: &Path) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_path(path)?;
    let header: Vec<&str> = KEY_COLUMNS.iter().copied().chain(table.column_names()).chain(TAIL_COLUMNS).collect();
    w.write_record(&header)?;
    for r in table.rows() {
        let mut rec: Vec<String> = vec![r.release_id.clone(), r.path.clone()];
        rec.extend(r.values.iter().map(|v| number_text(*v)));
        rec.extend(
            [r.flags.parse_failed, r.flags.npath_capped, r.flags.missing_features].iter().map(|b| flag(*b).to_string()),
        );
        rec.push(r.defect.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn check_schema(found: &[Column], expected: Option<&[Column]>) -> Result<(), DatasetError> {
    match expected {
        Some(e) if e != found => {
            let names = |c: &[Column]| c.iter().map(|c| c.name.clone()).collect::<Vec<_>>().join(",");
            Err(DatasetError::SchemaMismatch(format!("expected columns [{}], found [{}]", names(e), names(found))))
        }
        _ => Ok(()),
    }
}

fn parse_flag(s: &str) -> Result<bool, DatasetError> {
    match s {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(DatasetError::SchemaMismatch(format!("bad flag {other:?}"))),
    }
}

/// Reads a CSV table. With `expected`, the columns must match it exactly and
/// in order.
pub fn import_csv(path: &Path, expected: Option<&[Column]>) -> Result<FeatureTable, DatasetError> {
    let mut reader = csv::Reader::from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let n = header.len();
    if n < KEY_COLUMNS.len() + TAIL_COLUMNS.len()
        || header[..2] != KEY_COLUMNS
        || header[n - TAIL_COLUMNS.len()..] != TAIL_COLUMNS
    {
        return Err(DatasetError::SchemaMismatch(format!("unexpected header in {}", path.display())));
    }
    let columns: Vec<Column> = header[2..n - TAIL_COLUMNS.len()]
        .iter()
        .map(|name| Column { name: name.clone(), kind: column_kind(name) })
        .collect();
    check_schema(&columns, expected)?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let cell = |i: usize| rec.get(i).unwrap_or("");
        let values = (2..2 + columns.len())
            .map(|i| match cell(i) {
                MISSING => Ok(f64::NAN),
                s => s.parse::<f64>().map_err(|_| DatasetError::SchemaMismatch(format!("bad number {s:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let t = 2 + columns.len();
        rows.push(Row {
            release_id: cell(0).to_string(),
            path: cell(1).to_string(),
            values,
            flags: RowFlags {
                parse_failed: parse_flag(cell(t))?,
                npath_capped: parse_flag(cell(t + 1))?,
                missing_features: parse_flag(cell(t + 2))?,
            },
            defect: cell(t + 3)
                .parse()
                .map_err(|_| DatasetError::SchemaMismatch(format!("bad label {:?}", cell(t + 3))))?,
        });
    }
    FeatureTable::new(columns, rows)
}

#[derive(Serialize, Deserialize)]
struct SchemaLine {
    columns: Vec<Column>,
}

#[derive(Serialize, Deserialize)]
struct RowLine {
    release_id: String,
    path: String,
    values: Vec<Option<f64>>,
    defect: u8,
    flags: RowFlags,
}

pub fn export_jsonl(table: &FeatureTable, path: &Path) -> Result<(), DatasetError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut w, &SchemaLine { columns: table.columns().to_vec() })?;
    writeln!(w)?;
    for r in table.rows() {
        let line = RowLine {
            release_id: r.release_id.clone(),
            path: r.path.clone(),
            values: r.values.iter().map(|v| (!v.is_nan()).then_some(*v)).collect(),
            defect: r.defect,
            flags: r.flags,
        };
        serde_json::to_writer(&mut w, &line)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn import_jsonl(path: &Path, expected: Option<&[Column]>) -> Result<FeatureTable, DatasetError> {
    let mut lines = BufReader::new(std::fs::File::open(path)?).lines();
    let first = lines.next().ok_or_else(|| DatasetError::SchemaMismatch("empty file".into()))??;
    let schema: SchemaLine = serde_json::from_str(&first)?;
    check_schema(&schema.columns, expected)?;
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: RowLine = serde_json::from_str(&line)?;
        rows.push(Row {
            release_id: r.release_id,
            path: r.path,
            values: r.values.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect(),
            defect: r.defect,
            flags: r.flags,
        });
    }
    FeatureTable::new(schema.columns, rows)
}
