mod common;

use common::{data_dir, golden_kus as expected, ku_diff as diff};
use kunits::java::{read_release, OriginPolicy};
use kunits::ku::detect_release;

#[test]
fn golden_corpus_matches_annotations() {
    let (units, failures) = read_release(&data_dir("ku_golden"), "golden").unwrap();
    assert!(failures.is_empty());
    assert_eq!(units.len(), 56);
    let release = detect_release(&units, OriginPolicy::default()).unwrap();
    let want = expected();
    assert_eq!(want.len(), 56);

    let mut mismatches = Vec::new();
    for (file, w) in &want {
        let got = &release.files[file];
        assert!(!got.parse_failed, "{file} failed to parse");
        if got.vector != *w {
            mismatches.push(format!("{file}: {}", diff(w, &got.vector)));
        }
    }
    assert!(mismatches.is_empty(), "\n{}", mismatches.join("\n"));
}

#[test]
fn every_ku_is_exercised_by_its_two_files() {
    let want = expected();
    for k in 1..=28 {
        for suffix in ["a", "b"] {
            let file = format!("k{k:02}_{suffix}.java");
            assert!(want[&file].get(k) > 0, "{file} does not exercise K{k}");
        }
    }
}
