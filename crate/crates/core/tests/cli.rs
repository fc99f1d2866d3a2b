use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A Java class whose size and loop count grow with `level`.
fn java_class(name: &str, level: usize, rng: &mut ChaCha8Rng) -> String {
    let mut body = String::new();
    for m in 0..1 + level {
        body.push_str(&format!("    public int m{m}(int[] xs) {{\n        int s = 0;\n"));
        for l in 0..level {
            body.push_str(&format!(
                "        for (int i{l} = 0; i{l} < xs.length; i{l}++) {{ if (xs[i{l}] > {l}) s += xs[i{l}]; }}\n"
            ));
        }
        if rng.random_bool(0.5) {
            body.push_str(
                "        java.util.List<String> names = new java.util.ArrayList<>();\n        names.add(\"x\");\n",
            );
        }
        if rng.random_bool(0.3) {
            body.push_str("        try { Thread.sleep(1); } catch (InterruptedException e) { s--; }\n");
        }
        body.push_str("        return s;\n    }\n");
    }
    format!("package demo;\n\n// {name}\npublic class {name} {{\n    private int count;\n{body}}}\n")
}

fn write_release(root: &Path, tag: &str, files: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let src = root.join(format!("src-{tag}")).join("demo");
    std::fs::create_dir_all(&src).unwrap();
    let mut labels = String::from("File,RealBug\n");
    for i in 0..files {
        let level = rng.random_range(0..5);
        let name = format!("C{i}");
        std::fs::write(src.join(format!("{name}.java")), java_class(&name, level, &mut rng)).unwrap();
        let buggy = (level >= 3) ^ rng.random_bool(0.1);
        labels.push_str(&format!("demo/{name}.java,{}\n", buggy as u8));
    }
    std::fs::write(root.join(format!("labels-{tag}.csv")), labels).unwrap();
}

fn release_block(tag: &str) -> String {
    format!("[[release]]\nproject = \"demo\"\nrelease_tag = \"{tag}\"\nsource_root = \"src-{tag}\"\nlabel_file = \"labels-{tag}.csv\"\n\n")
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Fixture {
        let dir = tempfile::tempdir().unwrap();
        write_release(dir.path(), "1.0", 48, 1);
        write_release(dir.path(), "2.0", 56, 2);
        let base = "seed = 42\noutput_dir = \"out\"\n\n[thresholds]\nk_max = 6\n\n[study]\nshap_max_rows = 20\n\n";
        let good = format!("{base}{}{}", release_block("1.0"), release_block("2.0"));
        std::fs::write(dir.path().join("good.toml"), &good).unwrap();
        let bad = format!("{good}{}", release_block("3.0"));
        std::fs::create_dir_all(dir.path().join("src-3.0")).unwrap();
        std::fs::write(dir.path().join("bad.toml"), bad).unwrap();
        Fixture { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, config: &str, args: &[&str], threads: &str) -> (i32, String, String) {
        let out = Command::new(env!("CARGO_BIN_EXE_kunits"))
            .arg("--config")
            .arg(self.path(config))
            .args(args)
            .env("KUNITS_THREADS", threads)
            .env_remove("KUNITS_OUTPUT_DIR")
            .output()
            .unwrap();
        (
            out.status.code().unwrap(),
            String::from_utf8_lossy(&out.stdout).into_owned(),
            String::from_utf8_lossy(&out.stderr).into_owned(),
        )
    }

    fn run_dir(&self) -> PathBuf {
        let out = self.path("out");
        let mut runs: Vec<PathBuf> = std::fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        runs.sort();
        runs.into_iter().find(|p| p.join("tables").join("demo-1.0.csv").exists()).unwrap()
    }
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    walkdir::WalkDir::new(dir)
        .into_iter()
        .map(|e| e.unwrap())
        .filter(|e| e.file_type().is_file())
        .map(|e| (e.path().strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(e.path()).unwrap()))
        .collect()
}

#[test]
fn full_pipeline_is_byte_identical_across_runs_and_thread_counts() {
    let f = Fixture::new();
    let steps: [&[&str]; 5] = [
        &["extract"],
        &["prelim"],
        &["study", "--rq", "rq1", "rq2", "rq4", "rq6"],
        &["report"],
        &["explain", "--release", "demo-1.0", "--path", "demo/C3.java", "--top", "500"],
    ];
    for s in steps {
        let (code, _, err) = f.run("good.toml", s, "1");
        assert_eq!(code, 0, "{s:?}: {err}");
    }
    let run = f.run_dir();
    for name in [
        "manifest.json",
        "tables/demo-2.0.csv",
        "prelim/summary.json",
        "rq1/comparison.csv",
        "rq2/feature_ranks_KUCLS.csv",
        "rq4/model_ranks.csv",
        "report/summary.md",
        "models/demo-1.0/KUCLS.json",
        "explain/demo-1.0/demo__C3.java.txt",
    ] {
        assert!(run.join(name).exists(), "{name}");
    }
    let first = snapshot(&run);

    // Start over in a fresh output directory with four threads.
    std::fs::remove_dir_all(f.path("out")).unwrap();
    for s in steps {
        assert_eq!(f.run("good.toml", s, "4").0, 0);
    }
    let second = snapshot(&f.run_dir());
    assert_eq!(first.keys().collect::<Vec<_>>(), second.keys().collect::<Vec<_>>());
    for (k, v) in &first {
        assert!(v == &second[k], "{} differs", k.display());
    }

    let rq6: serde_json::Value = serde_json::from_slice(&first[Path::new("rq6/summary.json")]).unwrap();
    for cols in rq6["features"]["KUCLS_CC_COST_EFF"].as_object().unwrap().values() {
        assert_eq!(cols.as_array().unwrap().len(), 10);
    }
    let rq1: serde_json::Value = serde_json::from_slice(&first[Path::new("rq1/summary.json")]).unwrap();
    assert_eq!(rq1["medians"].as_object().unwrap().len(), 3);
    assert_eq!(rq1["medians"]["KUCLS"].as_object().unwrap().len(), 2);
}

#[test]
fn missing_label_file_is_isolated() {
    let f = Fixture::new();
    let (code, _, err) = f.run("bad.toml", &["extract"], "2");
    assert_eq!(code, 1, "{err}");
    assert!(err.contains("demo-3.0"));
    let out = f.path("out");
    let run = std::fs::read_dir(&out).unwrap().next().unwrap().unwrap().path();
    assert!(run.join("tables/demo-1.0.csv").exists());
    assert!(run.join("tables/demo-2.0.csv").exists());
    assert!(!run.join("tables/demo-3.0.csv").exists());
    let errors: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run.join("tables/extract_errors.json")).unwrap()).unwrap();
    assert_eq!(errors.as_array().unwrap().len(), 1);
    assert_eq!(errors[0]["release"], "demo-3.0");
}

#[test]
fn config_errors_and_unknown_inputs() {
    let f = Fixture::new();
    std::fs::write(f.path("noseed.toml"), "output_dir = \"out\"\n").unwrap();
    assert_eq!(f.run("noseed.toml", &["extract"], "1").0, 2);
    assert_eq!(f.run("good.toml", &["study", "--rq", "rq3"], "1").0, 2);
    assert_eq!(f.run("good.toml", &["extract"], "1").0, 0);
    // Tables exist but no model was trained yet.
    let (code, _, err) = f.run("good.toml", &["explain", "--release", "demo-1.0", "--path", "demo/C1.java"], "1");
    assert_eq!(code, 1);
    assert!(err.contains("model"), "{err}");
    let (code, _, err) = f.run("good.toml", &["explain", "--release", "demo-1.0", "--path", "demo/Nope.java"], "1");
    assert_eq!(code, 1);
    assert!(err.contains("Nope"), "{err}");
}
