mod common;

use common::{data_dir, oracle_metrics as expected};
use kunits::java::read_release;
use kunits::metrics::{compute_release_product_metrics, PRODUCT_METRIC_NAMES};

#[test]
fn twenty_files_match_hand_computed_values() {
    let (units, failures) = read_release(&data_dir("metrics_oracle"), "oracle").unwrap();
    assert!(failures.is_empty());
    let got = compute_release_product_metrics(&units);
    let want = expected();
    assert_eq!(want.len(), 20);
    assert_eq!(got.len(), 20);

    let mut mismatches = Vec::new();
    for (file, metrics) in &want {
        let m = &got[file];
        assert!(!m.parse_failed, "{file} failed to parse");
        for (i, name) in PRODUCT_METRIC_NAMES.iter().enumerate() {
            let w = metrics.get(*name).copied().unwrap_or(0.0);
            if (m.values[i] - w).abs() > 1e-9 {
                mismatches.push(format!("{file} {name}: want {w} got {}", m.values[i]));
            }
        }
    }
    assert!(mismatches.is_empty(), "\n{}", mismatches.join("\n"));
}
