//! End-to-end study on a generated two-release project: extraction,
//! preliminary analysis, the KU vs code-metric model comparison, and the
//! report. Pass a TOML config to run on real data instead.
//!
//!     cargo run --release --example run_study
//!     cargo run --release --example run_study -- kunits.toml

use std::path::Path;

use kunits::study::{run_extract, run_prelim, run_report, run_study, Rq, StudyConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Files with more loops are more often defective.
fn write_release(root: &Path, tag: &str, files: usize, seed: u64) -> anyhow::Result<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src = root.join(format!("src-{tag}")).join("demo");
    std::fs::create_dir_all(&src)?;
    let mut labels = String::from("File,RealBug\n");
    for i in 0..files {
        let level = rng.random_range(0..5);
        let loops: String = (0..level)
            .map(|l| {
                format!(
                    "        for (int i{l} = 0; i{l} < xs.length; i{l}++) {{ if (xs[i{l}] > {l}) s += xs[i{l}]; }}\n"
                )
            })
            .collect();
        let text = format!(
            "package demo;\n\npublic class C{i} {{\n    public int run(int[] xs) {{\n        int s = 0;\n{loops}        return s;\n    }}\n}}\n"
        );
        std::fs::write(src.join(format!("C{i}.java")), text)?;
        labels.push_str(&format!("demo/C{i}.java,{}\n", ((level >= 3) ^ rng.random_bool(0.1)) as u8));
    }
    std::fs::write(root.join(format!("labels-{tag}.csv")), labels)?;
    Ok(format!(
        "[[release]]\nproject = \"demo\"\nrelease_tag = \"{tag}\"\nsource_root = \"src-{tag}\"\nlabel_file = \"labels-{tag}.csv\"\n\n"
    ))
}

pub fn run_example() -> anyhow::Result<String> {
    let dir = tempfile::tempdir()?;
    let cfg = match std::env::args().nth(1) {
        Some(p) if p.ends_with(".toml") => StudyConfig::load(Path::new(&p))?,
        _ => {
            let mut text = String::from(
                "seed = 7\noutput_dir = \"out\"\n\n[thresholds]\nk_max = 6\n\n[study]\nshap_max_rows = 20\n\n",
            );
            text.push_str(&write_release(dir.path(), "1.0", 40, 1)?);
            text.push_str(&write_release(dir.path(), "2.0", 44, 2)?);
            StudyConfig::from_toml(&text, dir.path())?
        }
    };

    let extracted = run_extract(&cfg)?;
    let prelim = run_prelim(&cfg)?;
    let rq1 = run_study(&cfg, Rq::Rq1)?;
    run_report(&cfg)?;

    let mut out = format!("{} table(s), {} failure(s)\n", extracted.written.len(), extracted.failures.len());
    for b in &prelim.correlations.histogram {
        out.push_str(&format!("{:?}: {} KU(s)\n", b.strength, b.kus));
    }
    for (model, per_release) in &rq1.medians {
        for (release, auc) in per_release {
            out.push_str(&format!("{model:<10}{release:<10}{}\n", auc.map_or("-".into(), |a| format!("{a:.3}"))));
        }
    }
    for c in &rq1.comparisons {
        out.push_str(&format!("{} {} vs {}: {}\n", c.release, c.subject, c.baseline, c.effect_label()));
    }
    out.push_str(&format!("report in {}\n", cfg.run_dir().join("report").display()));
    Ok(out)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
