use proptest::prelude::*;

use kunits::java::{classify_type_origins, parse_java, OriginPolicy, SourceUnit};
use kunits::ku::{detect_kus, detect_release, KU_COUNT};

const STATEMENTS: &[&str] = &[
    "int v = 1;",
    "long[] arr = new long[4];",
    "int[][] grid = new int[2][3];",
    "if (a == b) { a++; } else { b = (a + 1) * 2; }",
    "for (int i = 0; i < 3; i++) { if (i > 1) { continue; } }",
    "while (a > 0) { a--; break; }",
    "do { a += 2; } while (a < 10);",
    "switch (a) { case 1: break; default: a = 0; }",
    "java.util.List<String> xs = new java.util.ArrayList<>();",
    "xs.stream().map(s -> s.trim()).filter(s -> s.isEmpty()).count();",
    "try { a = a / b; } catch (ArithmeticException e) { throw new IllegalStateException(); } finally { b = 1; }",
    "System.out.println(\"value \" + a);",
    "StringBuilder sb = new StringBuilder(); sb.append(a);",
    "synchronized (this) { a = b; }",
    "assert a >= 0;",
    "Runnable r = new Runnable() { public void run() { } };",
    "String s = String.format(\"%d\", a);",
    "Object o = (Object) \"x\"; int n = (int) 2.5;",
];

const MEMBERS: &[&str] = &[
    "private int count;",
    "static final String NAME = \"n\";",
    "public int getCount() { return count; }",
    "public void setCount(int c) { this.count = c; }",
    "void over(int a) { } void over(String a) { }",
    "static int sum(int... xs) { return xs.length; }",
    "class Inner { }",
    "enum Mode { ON, OFF; int code() { return 1; } }",
];

fn class_source(name: &str, members: &[usize], statements: &[usize]) -> String {
    let mut s = format!("class {name} {{\n    int a, b;\n");
    for m in members {
        s.push_str("    ");
        s.push_str(MEMBERS[*m]);
        s.push('\n');
    }
    s.push_str("    void body(java.util.List<String> xs) {\n");
    for st in statements {
        s.push_str("        ");
        s.push_str(STATEMENTS[*st]);
        s.push('\n');
    }
    s.push_str("    }\n}\n");
    s
}

fn class_strategy() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (prop::collection::vec(0..MEMBERS.len(), 0..4), prop::collection::vec(0..STATEMENTS.len(), 0..8))
}

fn parse(src: &str) -> kunits::java::SyntaxTree {
    parse_java(&SourceUnit::new("r", "F.java", src)).expect("generated source parses")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn locality_of_two_classes((m1, s1) in class_strategy(), (m2, s2) in class_strategy()) {
        let a = class_source("First", &m1, &s1);
        let b = class_source("Second", &m2, &s2);
        let joined = format!("{a}{b}");
        let (ta, tb, tj) = (parse(&a), parse(&b), parse(&joined));
        let origins = classify_type_origins(std::slice::from_ref(&tj));
        let (va, _) = detect_kus(&ta, &origins);
        let (vb, _) = detect_kus(&tb, &origins);
        let (vj, _) = detect_kus(&tj, &origins);
        prop_assert_eq!(va.add(&vb), vj);
    }

    #[test]
    fn appending_code_never_decreases((m1, s1) in class_strategy(), (m2, s2) in class_strategy()) {
        let a = class_source("First", &m1, &s1);
        let grown = format!("{a}{}", class_source("Second", &m2, &s2));
        let tg = parse(&grown);
        let origins = classify_type_origins(std::slice::from_ref(&tg));
        let (before, _) = detect_kus(&parse(&a), &origins);
        let (after, _) = detect_kus(&tg, &origins);
        for k in 0..KU_COUNT {
            prop_assert!(after.counts[k] >= before.counts[k], "K{} dropped", k + 1);
        }
    }

    #[test]
    fn trace_regroups_to_vector((m, s) in class_strategy()) {
        let t = parse(&class_source("Only", &m, &s));
        let origins = classify_type_origins(std::slice::from_ref(&t));
        let (v, trace) = detect_kus(&t, &origins);
        prop_assert_eq!(trace.to_vector(), v);
        prop_assert_eq!(trace.hits.len() as u64, v.total());
    }

    #[test]
    fn release_is_order_and_thread_independent(classes in prop::collection::vec(class_strategy(), 1..5)) {
        let units: Vec<SourceUnit> = classes
            .iter()
            .enumerate()
            .map(|(i, (m, s))| SourceUnit::new("r", format!("C{i}.java"), class_source(&format!("C{i}"), m, s)))
            .collect();
        let mut reversed = units.clone();
        reversed.reverse();
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = single.install(|| detect_release(&units, OriginPolicy::default())).unwrap();
        let b = detect_release(&reversed, OriginPolicy::default()).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn identical_files_at_different_paths_agree() {
    let src = class_source("Same", &[0, 2, 3], &[3, 4, 9, 10]);
    let units = vec![SourceUnit::new("r", "a/Same.java", src.clone()), SourceUnit::new("r", "b/Same.java", src)];
    let rel = detect_release(&units, OriginPolicy::default()).unwrap();
    assert_eq!(rel.files["a/Same.java"].vector, rel.files["b/Same.java"].vector);
    assert!(rel.files["a/Same.java"].vector.total() > 0);
}
