//! Product metrics of one Java file, and process metrics of a release window.
//!
//!     cargo run --example code_metrics
//!     cargo run --example code_metrics -- path/to/repo v2 v1

use std::collections::BTreeMap;
use std::path::Path;

use kunits::java::{classify_type_origins, parse_java, SourceUnit};
use kunits::metrics::{
    compute_process_metrics, compute_product_metrics, mine_history, parse_numstat_log, History, Window,
    PROCESS_METRIC_NAMES, PRODUCT_METRIC_NAMES,
};

const SAMPLE: &str = r#"package demo;

/** Parses key=value pairs. */
public class Pairs {
    private final java.util.Map<String, String> map = new java.util.HashMap<>();

    public void parse(String line) {
        for (String part : line.split(",")) {
            int eq = part.indexOf('=');
            if (eq < 0 || eq == part.length() - 1) {
                continue;
            }
            map.put(part.substring(0, eq), part.substring(eq + 1));
        }
    }

    // Missing keys map to the fallback.
    public String get(String key, String fallback) {
        return map.containsKey(key) ? map.get(key) : fallback;
    }
}
"#;

/// Three commits by two authors; the window is everything after `v1`.
fn scripted_history() -> anyhow::Result<History> {
    let h = |id: &str, parent: &str, who: &str| format!("@@commit\x1f{id}\x1f{parent}\x1f{who}\x1f0\n");
    let log = [
        h("c1", "", "ann@example.org"),
        "12\t0\tsrc/demo/Pairs.java\n".to_string(),
        h("c2", "c1", "bo@example.org"),
        "4\t2\tsrc/demo/Pairs.java\n".to_string(),
        h("c3", "c2", "ann@example.org"),
        "1\t1\tsrc/demo/Pairs.java\n3\t0\tsrc/demo/Other.java\n".to_string(),
    ]
    .concat();
    let tags = BTreeMap::from([("v1".to_string(), "c1".to_string()), ("v2".to_string(), "c3".to_string())]);
    Ok(History { commits: parse_numstat_log(&log)?, tags })
}

pub fn run_example() -> anyhow::Result<String> {
    let tree = parse_java(&SourceUnit::new("demo", "src/demo/Pairs.java", SAMPLE))?;
    let origins = classify_type_origins(std::slice::from_ref(&tree));
    let product = compute_product_metrics(&tree, &origins);

    let mut out = String::new();
    for name in [
        "CountLineCode",
        "CountLineComment",
        "SumCyclomatic",
        "MaxNesting_Max",
        "CountPath_Max",
        "CountClassCoupled",
        "PercentLackOfCohesion",
    ] {
        if let Some(v) = product.get(name) {
            out.push_str(&format!("{name:<24}{v}\n"));
        }
    }
    out.push_str(&format!("({} product metrics in all)\n", PRODUCT_METRIC_NAMES.len()));

    let args: Vec<String> = std::env::args().skip(1).collect();
    let (history, window, paths) = match args.as_slice() {
        [repo, tag, rest @ ..] if Path::new(repo).join(".git").exists() => {
            let history = mine_history(Path::new(repo))?;
            let window = Window { release_tag: tag.clone(), previous_tag: rest.first().cloned() };
            let mut paths: Vec<String> =
                history.commits.iter().flat_map(|c| c.changes.iter().map(|f| f.path.clone())).collect();
            paths.sort();
            paths.dedup();
            (history, window, paths)
        }
        _ => {
            let window = Window { release_tag: "v2".into(), previous_tag: Some("v1".into()) };
            (scripted_history()?, window, vec!["src/demo/Pairs.java".into(), "src/demo/Other.java".into()])
        }
    };
    for (path, m) in compute_process_metrics(&history, &window, &paths)? {
        let cells: Vec<String> = PROCESS_METRIC_NAMES.iter().zip(m.values).map(|(n, v)| format!("{n}={v}")).collect();
        out.push_str(&format!("{path}: {}\n", cells.join(" ")));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
