//! Correlation, paired tests, effect sizes, Scott-Knott ESD ranking, and
//! AutoSpearman feature selection on small fixed samples.
//!
//!     cargo run --example rank_stats

use std::collections::BTreeMap;

use kunits::stats::{
    auto_spearman, cliffs_delta, scott_knott_esd, spearman_rho, strength_of, wilcoxon_signed_rank, AutoSpearmanConfig,
};

pub fn run_example() -> anyhow::Result<String> {
    let mut out = String::new();

    let loc = [120.0, 40.0, 300.0, 75.0, 210.0, 15.0, 90.0, 160.0];
    let loops = [6.0, 1.0, 14.0, 3.0, 9.0, 0.0, 5.0, 6.0];
    let s = spearman_rho(&loc, &loops)?;
    out.push_str(&format!("rho(loc, loops) = {:.3} ({:?})\n", s.rho, strength_of(s.rho)));

    let a = [0.81, 0.79, 0.84, 0.80, 0.83, 0.82, 0.78, 0.85, 0.80, 0.81];
    let b = [0.74, 0.76, 0.75, 0.73, 0.77, 0.74, 0.72, 0.78, 0.75, 0.76];
    let w = wilcoxon_signed_rank(&a, &b)?;
    let (delta, magnitude) = cliffs_delta(&a, &b)?;
    out.push_str(&format!("wilcoxon p = {:.4} (exact {}), delta = {delta:.2} {magnitude:?}\n", w.p, w.exact));

    let groups: BTreeMap<String, Vec<f64>> = [
        ("RF", vec![0.82, 0.84, 0.81, 0.83, 0.85, 0.82]),
        ("DT", vec![0.74, 0.73, 0.76, 0.75, 0.72, 0.74]),
        ("KNN", vec![0.75, 0.74, 0.73, 0.76, 0.74, 0.75]),
        ("NB", vec![0.61, 0.63, 0.60, 0.64, 0.62, 0.61]),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    let mut ranks: Vec<(String, usize)> = scott_knott_esd(&groups).into_iter().collect();
    ranks.sort_by_key(|(_, r)| *r);
    for (model, rank) in ranks {
        out.push_str(&format!("SK-ESD rank {rank}: {model}\n"));
    }

    // Column 1 nearly duplicates column 0; column 2 is unrelated.
    let x0: Vec<f64> = (0..40).map(|i| i as f64).collect();
    let x1: Vec<f64> = x0.iter().map(|v| v * 2.0 + (v * 7.0).sin()).collect();
    let x2: Vec<f64> = (0..40).map(|i| ((i * 17) % 11) as f64).collect();
    let kept = auto_spearman(&[x0, x1, x2], AutoSpearmanConfig::default())?;
    out.push_str(&format!("AutoSpearman keeps columns {kept:?}\n"));
    Ok(out)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
