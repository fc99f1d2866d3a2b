//! Knowledge-unit detection.
//!
//! A file's KU vector counts, for each of the 28 knowledge units, how many
//! syntactic sites match one of that unit's capability rules (see
//! [`rules::RULES`]). Every site counts once per matching capability.

pub mod rules;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tree_sitter::Node;

use crate::java::{
    classify_type_origins, parse_java, type_mention_sites, DeclaredType, FileScope, OriginPolicy, PreOrder, Resolution,
    SourceUnit, Span, SyntaxTree, TypeOrigin, TypeOriginTable,
};
pub use rules::{list_rules, CallGate, CapabilityRule, Matcher, KU_COUNT, KU_NAMES, RULESET_VERSION};

/// Per-file counts, indexed K1..K28.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct KuVector {
    pub counts: [u32; KU_COUNT],
}

impl KuVector {
    /// Count for a 1-based KU number.
    pub fn get(&self, ku: usize) -> u32 {
        self.counts[ku - 1]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|c| u64::from(*c)).sum()
    }

    pub fn add(&self, other: &KuVector) -> KuVector {
        let mut out = *self;
        for (a, b) in out.counts.iter_mut().zip(other.counts.iter()) {
            *a += b;
        }
        out
    }

    pub fn column_names() -> Vec<String> {
        (1..=KU_COUNT).map(|k| format!("K{k}")).collect()
    }
}

/// One rule hit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hit {
    pub ku: usize,
    pub capability: &'static str,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DetectionTrace {
    pub hits: Vec<Hit>,
}

impl DetectionTrace {
    /// Regroups hits by KU.
    pub fn to_vector(&self) -> KuVector {
        let mut v = KuVector::default();
        for h in &self.hits {
            v.counts[h.ku - 1] += 1;
        }
        v
    }

    /// Hit counts per capability id.
    pub fn by_capability(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for h in &self.hits {
            *out.entry(h.capability).or_insert(0) += 1;
        }
        out
    }
}

/// What rule predicates can see about the file being scanned.
pub struct RuleContext<'t> {
    pub tree: &'t SyntaxTree,
    pub origins: &'t TypeOriginTable,
    pub scope: FileScope,
    /// Packages the file imports or spells out in qualified type names.
    packages: BTreeSet<String>,
}

impl<'t> RuleContext<'t> {
    pub fn new(tree: &'t SyntaxTree, origins: &'t TypeOriginTable) -> Self {
        let scope = FileScope::of(tree);
        let mut packages: BTreeSet<String> = scope.imported_packages();
        for (node, _) in tree.enumerate_nodes(&["scoped_type_identifier", "scoped_identifier"]) {
            if node.parent().is_some_and(|p| p.kind() == node.kind()) {
                continue;
            }
            let text: String = tree.text(node).chars().filter(|c| !c.is_whitespace()).collect();
            if text.starts_with(|c: char| c.is_lowercase()) {
                if let Some((pkg, _)) = text.rsplit_once('.') {
                    packages.insert(pkg.to_string());
                }
            }
        }
        RuleContext { tree, origins, scope, packages }
    }

    pub fn resolve(&self, written: &str) -> Resolution {
        self.origins.resolve(&self.scope, written)
    }

    /// The release declaration a written type name refers to, if any.
    pub fn declared_for_written(&self, written: &str) -> Option<&'t DeclaredType> {
        let r = self.resolve(written);
        if r.origin != TypeOrigin::ProjectLocal {
            return None;
        }
        r.qualified.as_deref().and_then(|q| self.origins.declared(q))
    }

    /// Simple names of all transitive supertypes of a written type, as far as
    /// the release declares them. External supertypes end the walk but are
    /// included.
    pub fn ancestors_of_written(&self, written: &str) -> Vec<String> {
        let mut out = Vec::new();
        let Some(start) = self.declared_for_written(written) else {
            return out;
        };
        let mut seen = BTreeSet::from([start.qualified.clone()]);
        let mut queue = vec![start];
        while let Some(d) = queue.pop() {
            for s in d.superclass.iter().chain(d.interfaces.iter()) {
                if !out.contains(s) {
                    out.push(s.clone());
                }
                let decls = self.origins.declared_by_simple(s);
                let next = decls.iter().find(|x| x.package == d.package).or_else(|| decls.first());
                if let Some(n) = next {
                    if seen.insert(n.qualified.clone()) {
                        queue.push(n);
                    }
                }
            }
        }
        out
    }

    pub fn mentions_package(&self, prefixes: &[&str]) -> bool {
        self.packages
            .iter()
            .any(|p| prefixes.iter().any(|pre| p == pre || p.strip_prefix(pre).is_some_and(|r| r.starts_with('.'))))
    }
}

/// A place in the source that names a type.
struct Mention<'a> {
    node: Node<'a>,
    written: String,
    resolution: Resolution,
}

fn type_mentions<'a>(ctx: &RuleContext<'a>) -> Vec<Mention<'a>> {
    type_mention_sites(ctx.tree)
        .into_iter()
        .map(|(node, written)| {
            let resolution = ctx.resolve(&written);
            Mention { node, written, resolution }
        })
        .collect()
}

fn last_segment(s: &str) -> &str {
    s.rsplit('.').next().unwrap_or(s)
}

fn under(name: &str, prefix: &str) -> bool {
    name.strip_prefix(prefix).is_some_and(|r| r.starts_with('.'))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum ApiMatch {
    /// Longest-prefix package match; the length orders candidates.
    Package(usize),
    Explicit,
}

fn api_match(m: &Mention<'_>, types: &[&str], packages: &[&str], favor_recall: bool) -> Option<ApiMatch> {
    let names: Vec<&str> = match m.resolution.origin {
        TypeOrigin::JavaPlatform => m.resolution.qualified.iter().map(|s| s.as_str()).collect(),
        TypeOrigin::Unknown => m.resolution.candidates.iter().map(|s| s.as_str()).collect(),
        TypeOrigin::ProjectLocal | TypeOrigin::External => return None,
    };
    if types.iter().any(|t| names.iter().any(|q| q == t || under(q, t))) {
        return Some(ApiMatch::Explicit);
    }
    let best = packages.iter().filter(|p| names.iter().any(|q| under(q, p))).map(|p| p.len()).max();
    if let Some(len) = best {
        return Some(ApiMatch::Package(len));
    }
    // Unresolved simple names count when they match an allowlisted type.
    if favor_recall && m.resolution.origin == TypeOrigin::Unknown && m.resolution.candidates.is_empty() {
        let simple = last_segment(&m.written);
        let head = m.written.split('.').next().unwrap_or(&m.written);
        if types.iter().any(|t| last_segment(t) == simple || last_segment(t) == head) {
            return Some(ApiMatch::Explicit);
        }
    }
    None
}

const STREAM_SOURCES: &[&str] = &["Stream", "IntStream", "LongStream", "DoubleStream", "StreamSupport"];

/// Whether an invocation's receiver chain starts from a stream.
fn on_stream_chain(tree: &SyntaxTree, invocation: Node<'_>) -> bool {
    let mut cur = invocation;
    while let Some(obj) = cur.child_by_field_name("object") {
        match obj.kind() {
            "method_invocation" => {
                let name = obj.child_by_field_name("name").map(|n| tree.text(n));
                if matches!(name, Some("stream" | "parallelStream")) {
                    return true;
                }
                cur = obj;
            }
            "identifier" => return STREAM_SOURCES.contains(&tree.text(obj)),
            _ => return false,
        }
    }
    false
}

fn call_matches(ctx: &RuleContext<'_>, node: Node<'_>, names: &[&str], gate: CallGate) -> bool {
    let Some(name) = node.child_by_field_name("name") else {
        return false;
    };
    if !names.contains(&ctx.tree.text(name)) {
        return false;
    }
    match gate {
        CallGate::Always => true,
        CallGate::StreamChain => on_stream_chain(ctx.tree, node),
        CallGate::NotStreamChain => !on_stream_chain(ctx.tree, node),
        CallGate::Receiver(receivers) => node
            .child_by_field_name("object")
            .is_some_and(|o| o.kind() == "identifier" && receivers.contains(&ctx.tree.text(o))),
        CallGate::Imports(prefixes) => ctx.mentions_package(prefixes),
    }
}

struct Scan<'a> {
    by_kind: HashMap<&'static str, Vec<Node<'a>>>,
    mentions: Vec<Mention<'a>>,
}

fn flatten<'m>(m: &'m Matcher, out: &mut Vec<&'m Matcher>) {
    match m {
        Matcher::All(parts) => parts.iter().for_each(|p| flatten(p, out)),
        other => out.push(other),
    }
}

/// Counts the KUs of one parsed file against the release's origin table.
pub fn detect_kus(tree: &SyntaxTree, origins: &TypeOriginTable) -> (KuVector, DetectionTrace) {
    let ctx = RuleContext::new(tree, origins);
    let mut by_kind: HashMap<&'static str, Vec<Node<'_>>> = HashMap::new();
    for node in PreOrder::new(tree.root()).filter(|n| n.is_named()) {
        by_kind.entry(node.kind()).or_default().push(node);
    }
    let scan = Scan { by_kind, mentions: type_mentions(&ctx) };

    let mut vector = KuVector::default();
    let mut hits = Vec::new();
    let mut record = |rule: &CapabilityRule, node: Node<'_>| {
        vector.counts[rule.ku - 1] += 1;
        hits.push((node.start_byte(), Hit { ku: rule.ku, capability: rule.id, span: Span::of(node) }));
    };

    let rules = list_rules();
    for rule in rules {
        let mut parts = Vec::new();
        flatten(&rule.matcher, &mut parts);
        for part in parts {
            match *part {
                Matcher::Syntax { kinds, when } => {
                    for kind in kinds {
                        for node in scan.by_kind.get(kind).into_iter().flatten() {
                            if when.is_none_or(|p| p(&ctx, *node)) {
                                record(rule, *node);
                            }
                        }
                    }
                }
                Matcher::Call { names, gate } => {
                    for node in scan.by_kind.get("method_invocation").into_iter().flatten() {
                        if call_matches(&ctx, *node, names, gate) {
                            record(rule, *node);
                        }
                    }
                }
                Matcher::Api { .. } | Matcher::All(_) => {}
            }
        }
    }

    // Each type mention goes to at most one capability per KU: the first rule
    // naming the type explicitly, else the rule with the most specific package.
    let recall = origins.policy().favor_recall;
    for ku in 1..=KU_COUNT {
        let api_rules: Vec<(&CapabilityRule, &[&str], &[&str])> = rules
            .iter()
            .filter(|r| r.ku == ku)
            .flat_map(|r| {
                let mut parts = Vec::new();
                flatten(&r.matcher, &mut parts);
                parts
                    .into_iter()
                    .filter_map(move |p| match *p {
                        Matcher::Api { types, packages } => Some((r, types, packages)),
                        _ => None,
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        if api_rules.is_empty() {
            continue;
        }
        for m in &scan.mentions {
            let mut best: Option<(ApiMatch, &CapabilityRule)> = None;
            for (rule, types, packages) in &api_rules {
                if let Some(found) = api_match(m, types, packages, recall) {
                    if best.is_none_or(|(b, _)| found > b) {
                        best = Some((found, rule));
                    }
                }
            }
            if let Some((_, rule)) = best {
                record(rule, m.node);
            }
        }
    }

    hits.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.capability.cmp(b.1.capability)));
    let trace = DetectionTrace { hits: hits.into_iter().map(|(_, h)| h).collect() };
    debug_assert_eq!(trace.to_vector(), vector, "trace must regroup to the vector");
    (vector, trace)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KuError {
    #[error("release has no .java files")]
    EmptyRelease,
    #[error("units belong to different releases: {0} and {1}")]
    MixedReleases(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileKus {
    pub vector: KuVector,
    pub parse_failed: bool,
}

/// KU vectors of one release keyed by normalized path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReleaseKus {
    pub release_id: String,
    pub files: BTreeMap<String, FileKus>,
}

impl ReleaseKus {
    pub fn parse_failures(&self) -> usize {
        self.files.values().filter(|f| f.parse_failed).count()
    }
}

/// Parses and scans every unit of one release.
pub fn detect_release(units: &[SourceUnit], policy: OriginPolicy) -> Result<ReleaseKus, KuError> {
    let first = units.first().ok_or(KuError::EmptyRelease)?;
    if let Some(other) = units.iter().find(|u| u.release_id != first.release_id) {
        return Err(KuError::MixedReleases(first.release_id.clone(), other.release_id.clone()));
    }
    let parsed: Vec<_> = units.par_iter().map(parse_java).collect();
    let trees: Vec<SyntaxTree> = parsed.iter().filter_map(|p| p.as_ref().ok().cloned()).collect();
    let origins = classify_type_origins(&trees).with_policy(policy);
    let files = units
        .par_iter()
        .zip(parsed.par_iter())
        .map(|(u, p)| {
            let file = match p {
                Ok(tree) => FileKus { vector: detect_kus(tree, &origins).0, parse_failed: false },
                Err(_) => FileKus { vector: KuVector::default(), parse_failed: true },
            };
            (u.path.clone(), file)
        })
        .collect();
    Ok(ReleaseKus { release_id: first.release_id.clone(), files })
}

pub fn csv_header() -> Vec<String> {
    let mut h = vec!["release".to_string(), "path".into(), "parse_failed".into()];
    h.extend(KuVector::column_names());
    h
}

/// Writes `release,path,parse_failed,K1..K28` rows.
pub fn write_csv<W: Write>(out: W, releases: &[ReleaseKus]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header())?;
    for r in releases {
        for (path, f) in &r.files {
            let mut row = vec![r.release_id.clone(), path.clone(), f.parse_failed.to_string()];
            row.extend(f.vector.counts.iter().map(|c| c.to_string()));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan(src: &str) -> (KuVector, DetectionTrace) {
        let tree = parse_java(&SourceUnit::new("r", "A.java", src)).unwrap();
        let origins = classify_type_origins(std::slice::from_ref(&tree));
        detect_kus(&tree, &origins)
    }

    fn caps(src: &str) -> BTreeMap<&'static str, usize> {
        scan(src).1.by_capability()
    }

    #[test]
    fn generic_class_counts_once() {
        let (v, _) = scan("class Box<T> {}");
        assert_eq!(v.get(8), 1);
        assert_eq!(v.total(), 1);
    }

    #[test]
    fn empty_and_package_only_files_are_zero() {
        assert_eq!(scan("").0, KuVector::default());
        assert_eq!(scan("package a.b;\n").0, KuVector::default());
    }

    #[test]
    fn try_for_and_arraylist() {
        let src = "import java.util.ArrayList;\nclass A { void m() {\n\
                   for (int i = 0; i < 3; i++) {}\n\
                   try { new ArrayList<String>(); } catch (RuntimeException e) {}\n} }";
        let (v, _) = scan(src);
        assert!(v.get(11) >= 1);
        assert!(v.get(4) >= 1);
        assert!(v.get(8) >= 1);
    }

    #[test]
    fn comments_and_strings_do_not_match_keywords() {
        let src = "class A { // final synchronized while\n String s = \"final while\"; }";
        let c = caps(src);
        assert!(!c.contains_key("K7.C2"));
        assert!(!c.contains_key("K16.C2"));
        assert!(!c.contains_key("K4.C1"));
    }

    #[test]
    fn stream_calls_need_a_stream_chain() {
        let src = "import java.util.*;\nclass A { void m(List<Integer> xs, Optional<Integer> o) {\n\
                   xs.stream().map(x -> x).filter(x -> x > 0).count();\n\
                   o.map(x -> x);\n\
                   xs.forEach(System.out::println);\n} }";
        let c = caps(src);
        assert_eq!(c.get("K10.C1"), Some(&1));
        assert_eq!(c.get("K10.C4"), Some(&1));
        assert_eq!(c.get("K8.C4"), Some(&1));
        assert_eq!(c.get("K10.C3"), Some(&1));
    }

    #[test]
    fn local_class_shadows_platform_name() {
        let src = "class List {}\nclass A { List l; }";
        assert!(!caps(src).contains_key("K8.C2"));
    }

    #[test]
    fn external_types_do_not_count() {
        let src = "import org.acme.Entity;\n@Entity class A {}";
        assert_eq!(scan(src).0.get(19), 0);
        let src = "import javax.persistence.Entity;\n@Entity class A {}";
        assert_eq!(scan(src).0.get(19), 1);
    }

    #[test]
    fn recall_policy_governs_unresolved_names() {
        let src = "class A { void m() { Executors.newFixedThreadPool(2); } }";
        let tree = parse_java(&SourceUnit::new("r", "A.java", src)).unwrap();
        let origins = classify_type_origins(std::slice::from_ref(&tree));
        assert_eq!(detect_kus(&tree, &origins).0.get(16), 1);
        let strict = origins.with_policy(OriginPolicy { favor_recall: false });
        assert_eq!(detect_kus(&tree, &strict).0.get(16), 0);
    }

    #[test]
    fn wildcard_import_candidates_resolve_mentions() {
        let src = "import java.util.concurrent.*;\nclass A { CopyOnWriteArrayList<String> l; ExecutorService e; }";
        let c = caps(src);
        assert_eq!(c.get("K16.C3"), Some(&1));
        assert_eq!(c.get("K16.C1"), Some(&1));
    }

    #[test]
    fn most_specific_package_wins() {
        let src = "import java.util.concurrent.atomic.AtomicInteger;\nimport java.util.concurrent.Semaphore;\n\
                   class A { AtomicInteger a; Semaphore s; }";
        let c = caps(src);
        assert_eq!(c.get("K16.C2"), Some(&1));
        assert_eq!(c.get("K16.C3"), Some(&1));
    }

    #[test]
    fn polymorphism_and_overrides_use_release_hierarchy() {
        let src = "abstract class Shape { abstract double area(); }\n\
                   class Sq extends Shape { double area() { return 1; } }\n\
                   class U { void m(Shape s) { Shape x = new Sq(); Sq y = new Sq(); } }";
        let c = caps(src);
        assert_eq!(c.get("K6.C1"), Some(&1));
        assert_eq!(c.get("K6.C2"), Some(&1));
        assert_eq!(c.get("K6.C3"), Some(&1));
        assert_eq!(c.get("K6.C4"), Some(&2));
    }

    #[test]
    fn csv_header_is_fixed() {
        let h = csv_header();
        assert_eq!(h.len(), 31);
        assert_eq!(&h[..4], &["release", "path", "parse_failed", "K1"]);
        assert_eq!(h[30], "K28");
    }

    #[test]
    fn release_flags_unparseable_files() {
        let units = vec![
            SourceUnit::new("r", "A.java", "class A { int x; }"),
            SourceUnit::new("r", "B.java", "record B(int x) {}"),
            SourceUnit::new("r", "C.java", "class C { int x; }"),
        ];
        let rel = detect_release(&units, OriginPolicy::default()).unwrap();
        assert_eq!(rel.files.len(), 3);
        assert_eq!(rel.parse_failures(), 1);
        assert!(rel.files["B.java"].parse_failed);
        assert_eq!(rel.files["A.java"].vector, rel.files["C.java"].vector);
        assert_eq!(detect_release(&[], OriginPolicy::default()), Err(KuError::EmptyRelease));
    }
}
