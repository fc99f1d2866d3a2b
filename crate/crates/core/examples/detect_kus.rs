//! Count knowledge units (KUs) in a Java file, with the sites that matched.
//!
//!     cargo run --example detect_kus -- path/to/File.java

use kunits::java::{classify_type_origins, parse_java, SourceUnit};
use kunits::ku::{detect_kus, KU_NAMES};

const SAMPLE: &str = r#"package demo;

import java.util.List;
import java.util.ArrayList;
import java.util.concurrent.ExecutorService;
import java.util.concurrent.Executors;

public class Worker {
    private final List<String> done = new ArrayList<>();

    public void run(String[] jobs) throws InterruptedException {
        ExecutorService pool = Executors.newFixedThreadPool(2);
        for (String job : jobs) {
            if (job.isEmpty()) continue;
            pool.submit(() -> done.add(job));
        }
        pool.shutdown();
        try {
            Thread.sleep(10);
        } catch (InterruptedException e) {
            throw e;
        }
    }
}
"#;

pub fn run_example() -> anyhow::Result<String> {
    let (path, text) = match std::env::args().nth(1) {
        Some(p) if p.ends_with(".java") => (p.clone(), std::fs::read_to_string(&p)?),
        _ => ("demo/Worker.java".to_string(), SAMPLE.to_string()),
    };
    let tree = parse_java(&SourceUnit::new("demo", path, text))?;
    let origins = classify_type_origins(std::slice::from_ref(&tree));
    let (vector, trace) = detect_kus(&tree, &origins);

    let mut out = String::new();
    for (i, name) in KU_NAMES.iter().enumerate() {
        let n = vector.get(i + 1);
        if n > 0 {
            out.push_str(&format!("K{:<3}{:<40}{}\n", i + 1, name, n));
        }
    }
    out.push_str(&format!("total {}\n", vector.total()));
    for hit in &trace.hits {
        out.push_str(&format!("  K{} {} at line {}\n", hit.ku, hit.capability, hit.span.start_line));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
