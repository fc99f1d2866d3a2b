//! Parse a Java file and print its syntax tree, errors, and type origins.
//!
//!     cargo run --example parse_java -- path/to/File.java

use kunits::java::{classify_type_origins, parse_java, FileScope, SourceUnit};

const SAMPLE: &str = r#"package demo;

import java.util.ArrayList;
import org.example.Widget;

class Box<T> {
    private T value;
    T get() { return value; }
}
"#;

pub fn run_example() -> anyhow::Result<String> {
    let (path, text) = match std::env::args().nth(1) {
        Some(p) if p.ends_with(".java") => (p.clone(), std::fs::read_to_string(&p)?),
        _ => ("demo/Box.java".to_string(), SAMPLE.to_string()),
    };
    let tree = parse_java(&SourceUnit::new("demo", path, text))?;
    let origins = classify_type_origins(std::slice::from_ref(&tree));
    let scope = FileScope::of(&tree);

    let mut out = String::new();
    out.push_str(&format!("{}\n", tree.to_sexp()));
    for e in tree.errors() {
        out.push_str(&format!("syntax error at lines {}: {}\n", e.span, e.message));
    }
    for name in scope.single_imports.keys() {
        out.push_str(&format!("{name}: {:?}\n", origins.resolve(&scope, name).origin));
    }
    Ok(out)
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    print!("{}", run_example()?);
    Ok(())
}
