//! Import-and-declaration heuristic that stands in for full type binding.
//!
//! Without a classpath a simple type name is resolved from, in order: the
//! file's single-type imports, types declared in the same package, wildcard
//! imports of packages the release declares, implicit `java.lang`, and finally
//! any type the release declares with that simple name. Whatever is left is
//! [`TypeOrigin::Unknown`], carrying the wildcard-import candidates it could
//! stand for.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use super::{children, has_modifier, is_type_declaration, named_children, SyntaxTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TypeOrigin {
    ProjectLocal,
    JavaPlatform,
    External,
    Unknown,
}

/// How unresolved names are treated downstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OriginPolicy {
    /// Treat `Unknown` as project code and let unresolved names that match an
    /// API allowlist by simple name count toward that API's capability.
    pub favor_recall: bool,
}

impl Default for OriginPolicy {
    fn default() -> Self {
        OriginPolicy { favor_recall: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DeclaredKind {
    Class,
    AbstractClass,
    Interface,
    Enum,
    Annotation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSig {
    pub name: String,
    pub arity: usize,
    pub private: bool,
}

/// A type declared somewhere in the release.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeclaredType {
    pub qualified: String,
    pub simple: String,
    pub package: String,
    pub kind: DeclaredKind,
    /// Simple name of the `extends` type (first one for interfaces).
    pub superclass: Option<String>,
    pub interfaces: Vec<String>,
    pub methods: Vec<MethodSig>,
    pub path: String,
    pub top_level: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    pub origin: TypeOrigin,
    pub qualified: Option<String>,
    /// Fully qualified names the type could stand for through wildcard imports.
    pub candidates: Vec<String>,
}

/// Per-file import context.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FileScope {
    pub package: String,
    pub single_imports: BTreeMap<String, String>,
    pub wildcard_imports: Vec<String>,
}

impl FileScope {
    pub fn of(tree: &SyntaxTree) -> FileScope {
        let mut scope = FileScope::default();
        for child in named_children(tree.root()) {
            match child.kind() {
                "package_declaration" => {
                    if let Some(name) = named_children(child)
                        .into_iter()
                        .find(|c| matches!(c.kind(), "scoped_identifier" | "identifier"))
                    {
                        scope.package = tree.text(name).to_string();
                    }
                }
                "import_declaration" => {
                    let parts = children(child);
                    if parts.iter().any(|c| c.kind() == "static") {
                        continue;
                    }
                    let Some(name) = parts.iter().find(|c| matches!(c.kind(), "scoped_identifier" | "identifier"))
                    else {
                        continue;
                    };
                    let name = strip_ws(tree.text(*name));
                    if parts.iter().any(|c| c.kind() == "asterisk") {
                        scope.wildcard_imports.push(name);
                    } else {
                        let simple = name.rsplit('.').next().unwrap_or(&name).to_string();
                        scope.single_imports.insert(simple, name);
                    }
                }
                _ => {}
            }
        }
        scope
    }

    /// Every package this file imports from, directly or by wildcard.
    pub fn imported_packages(&self) -> BTreeSet<String> {
        let mut out: BTreeSet<String> = self.wildcard_imports.iter().cloned().collect();
        for q in self.single_imports.values() {
            if let Some((pkg, _)) = q.rsplit_once('.') {
                out.insert(pkg.to_string());
            }
        }
        out
    }
}

fn strip_ws(s: &str) -> String {
    s.chars().filter(|c| !c.is_whitespace()).collect()
}

fn is_platform_name(qualified: &str) -> bool {
    qualified.starts_with("java.") || qualified.starts_with("javax.")
}

/// Release-wide view of declared and imported type names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeOriginTable {
    origins: BTreeMap<String, TypeOrigin>,
    declared: BTreeMap<String, DeclaredType>,
    declared_simple: BTreeMap<String, Vec<String>>,
    policy: OriginPolicy,
}

impl TypeOriginTable {
    pub fn with_policy(mut self, policy: OriginPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn policy(&self) -> OriginPolicy {
        self.policy
    }

    /// Origin of a simple or qualified name as seen release-wide.
    pub fn origin(&self, name: &str) -> TypeOrigin {
        self.origins.get(name).copied().unwrap_or(TypeOrigin::Unknown)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, TypeOrigin)> {
        self.origins.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn declared(&self, qualified: &str) -> Option<&DeclaredType> {
        self.declared.get(qualified)
    }

    pub fn declared_types(&self) -> impl Iterator<Item = &DeclaredType> {
        self.declared.values()
    }

    /// Declarations sharing a simple name, in qualified-name order.
    pub fn declared_by_simple(&self, simple: &str) -> Vec<&DeclaredType> {
        self.declared_simple
            .get(simple)
            .map(|qs| qs.iter().filter_map(|q| self.declared.get(q)).collect())
            .unwrap_or_default()
    }

    /// Resolves a type name as written in a file (simple, `Outer.Inner`, or
    /// fully qualified).
    pub fn resolve(&self, scope: &FileScope, written: &str) -> Resolution {
        let written = strip_ws(written);
        let mut parts = written.splitn(2, '.');
        let head = parts.next().unwrap_or_default();
        let rest = parts.next();
        if rest.is_some() && head.chars().next().is_some_and(|c| c.is_lowercase()) {
            return self.resolve_qualified(&written);
        }
        let base = self.resolve_simple(scope, head);
        match rest {
            None => base,
            Some(rest) => Resolution {
                origin: base.origin,
                qualified: base.qualified.map(|q| format!("{q}.{rest}")),
                candidates: base.candidates.into_iter().map(|c| format!("{c}.{rest}")).collect(),
            },
        }
    }

    fn resolve_qualified(&self, qualified: &str) -> Resolution {
        let origin = if self.declared.contains_key(qualified) {
            TypeOrigin::ProjectLocal
        } else if is_platform_name(qualified) {
            TypeOrigin::JavaPlatform
        } else {
            TypeOrigin::External
        };
        Resolution { origin, qualified: Some(qualified.to_string()), candidates: vec![] }
    }

    fn resolve_simple(&self, scope: &FileScope, simple: &str) -> Resolution {
        if let Some(q) = scope.single_imports.get(simple) {
            return self.resolve_qualified(q);
        }
        let same_package =
            if scope.package.is_empty() { simple.to_string() } else { format!("{}.{simple}", scope.package) };
        if self.declared.contains_key(&same_package) {
            return local(same_package);
        }
        // Nested types of the current package's classes.
        if let Some(q) = self.declared_by_simple(simple).into_iter().find(|d| d.package == scope.package) {
            return local(q.qualified.clone());
        }
        for pkg in &scope.wildcard_imports {
            let q = format!("{pkg}.{simple}");
            if self.declared.contains_key(&q) {
                return local(q);
            }
        }
        if JAVA_LANG.binary_search(&simple).is_ok() {
            return Resolution {
                origin: TypeOrigin::JavaPlatform,
                qualified: Some(format!("java.lang.{simple}")),
                candidates: vec![],
            };
        }
        if let Some(d) = self.declared_by_simple(simple).first() {
            return local(d.qualified.clone());
        }
        Resolution {
            origin: TypeOrigin::Unknown,
            qualified: None,
            candidates: scope.wildcard_imports.iter().map(|p| format!("{p}.{simple}")).collect(),
        }
    }

    /// `ProjectLocal`, or `Unknown` under the recall policy.
    pub fn counts_as_local(&self, r: &Resolution) -> bool {
        r.origin == TypeOrigin::ProjectLocal || (self.policy.favor_recall && r.origin == TypeOrigin::Unknown)
    }
}

fn local(qualified: String) -> Resolution {
    Resolution { origin: TypeOrigin::ProjectLocal, qualified: Some(qualified), candidates: vec![] }
}

#[derive(Default)]
struct PartialTable {
    declared: Vec<DeclaredType>,
    imports: Vec<String>,
}

fn partial_table(tree: &SyntaxTree) -> PartialTable {
    let scope = FileScope::of(tree);
    let mut part = PartialTable { imports: scope.single_imports.values().cloned().collect(), ..Default::default() };
    for child in named_children(tree.root()) {
        if is_type_declaration(child) {
            collect_declared(tree, child, &scope.package, None, &mut part.declared);
        }
    }
    part
}

fn collect_declared(
    tree: &SyntaxTree,
    decl: Node<'_>,
    package: &str,
    outer: Option<&str>,
    out: &mut Vec<DeclaredType>,
) {
    let Some(name) = decl.child_by_field_name("name") else {
        return;
    };
    let simple = tree.text(name).to_string();
    let prefix = match outer {
        Some(o) => o.to_string(),
        None if package.is_empty() => String::new(),
        None => package.to_string(),
    };
    let qualified = if prefix.is_empty() { simple.clone() } else { format!("{prefix}.{simple}") };
    let kind = match decl.kind() {
        "interface_declaration" => DeclaredKind::Interface,
        "enum_declaration" => DeclaredKind::Enum,
        "annotation_type_declaration" => DeclaredKind::Annotation,
        _ if has_modifier(decl, "abstract") => DeclaredKind::AbstractClass,
        _ => DeclaredKind::Class,
    };
    let (superclass, interfaces) = supertypes(tree, decl);
    let body = decl.child_by_field_name("body");
    let mut methods = Vec::new();
    if let Some(body) = body {
        for member in body_members(body) {
            if member.kind() == "method_declaration" {
                let arity = member
                    .child_by_field_name("parameters")
                    .map(|p| {
                        named_children(p)
                            .iter()
                            .filter(|c| matches!(c.kind(), "formal_parameter" | "spread_parameter"))
                            .count()
                    })
                    .unwrap_or(0);
                methods.push(MethodSig {
                    name: member.child_by_field_name("name").map(|n| tree.text(n).to_string()).unwrap_or_default(),
                    arity,
                    private: has_modifier(member, "private"),
                });
            }
        }
    }
    out.push(DeclaredType {
        qualified: qualified.clone(),
        simple,
        package: package.to_string(),
        kind,
        superclass,
        interfaces,
        methods,
        path: tree.path().to_string(),
        top_level: outer.is_none(),
    });
    if let Some(body) = body {
        for member in body_members(body) {
            if is_type_declaration(member) {
                collect_declared(tree, member, package, Some(&qualified), out);
            }
        }
    }
}

/// Members of a class, interface, enum, or annotation body.
pub(crate) fn body_members(body: Node<'_>) -> Vec<Node<'_>> {
    let mut out = Vec::new();
    for c in named_children(body) {
        if c.kind() == "enum_body_declarations" {
            out.extend(named_children(c));
        } else {
            out.push(c);
        }
    }
    out
}

/// Base simple name of a type node: generics stripped, last path segment.
pub(crate) fn base_type_name(tree: &SyntaxTree, ty: Node<'_>) -> Option<String> {
    match ty.kind() {
        "type_identifier" => Some(tree.text(ty).to_string()),
        "scoped_type_identifier" => {
            let t = strip_ws(tree.text(ty));
            Some(t.rsplit('.').next().unwrap_or(&t).to_string())
        }
        "generic_type" => named_children(ty)
            .into_iter()
            .find(|c| matches!(c.kind(), "type_identifier" | "scoped_type_identifier"))
            .and_then(|c| base_type_name(tree, c)),
        "annotated_type" => named_children(ty).into_iter().rev().find_map(|c| base_type_name(tree, c)),
        _ => None,
    }
}

/// Written (possibly dotted) name of a type node without type arguments.
pub(crate) fn written_type_name(tree: &SyntaxTree, ty: Node<'_>) -> Option<String> {
    match ty.kind() {
        "type_identifier" | "scoped_type_identifier" => Some(strip_ws(tree.text(ty))),
        "generic_type" => named_children(ty)
            .into_iter()
            .find(|c| matches!(c.kind(), "type_identifier" | "scoped_type_identifier"))
            .and_then(|c| written_type_name(tree, c)),
        "annotated_type" => named_children(ty).into_iter().rev().find_map(|c| written_type_name(tree, c)),
        _ => None,
    }
}

pub(crate) fn supertypes(tree: &SyntaxTree, decl: Node<'_>) -> (Option<String>, Vec<String>) {
    let mut superclass = None;
    let mut interfaces = Vec::new();
    for c in named_children(decl) {
        match c.kind() {
            "superclass" => {
                superclass = named_children(c).into_iter().find_map(|t| base_type_name(tree, t));
            }
            "super_interfaces" | "extends_interfaces" => {
                for list in named_children(c) {
                    for t in named_children(list) {
                        if let Some(n) = base_type_name(tree, t) {
                            interfaces.push(n);
                        }
                    }
                }
                if c.kind() == "extends_interfaces" && superclass.is_none() {
                    superclass = interfaces.first().cloned();
                }
            }
            _ => {}
        }
    }
    (superclass, interfaces)
}

/// Builds the release table. Order of `trees` does not matter.
pub fn classify_type_origins(trees: &[SyntaxTree]) -> TypeOriginTable {
    let parts: Vec<PartialTable> = trees.iter().map(partial_table).collect();

    let mut table = TypeOriginTable::default();
    for part in &parts {
        for d in &part.declared {
            // Duplicate qualified names across files: keep the smallest path.
            match table.declared.get(&d.qualified) {
                Some(existing) if existing.path <= d.path => {}
                _ => {
                    table.declared.insert(d.qualified.clone(), d.clone());
                }
            }
        }
    }
    for d in table.declared.values() {
        table.declared_simple.entry(d.simple.clone()).or_default().push(d.qualified.clone());
        table.origins.insert(d.qualified.clone(), TypeOrigin::ProjectLocal);
        table.origins.insert(d.simple.clone(), TypeOrigin::ProjectLocal);
    }
    for part in &parts {
        for q in &part.imports {
            let origin = if table.declared.contains_key(q) {
                TypeOrigin::ProjectLocal
            } else if is_platform_name(q) {
                TypeOrigin::JavaPlatform
            } else {
                TypeOrigin::External
            };
            table.origins.insert(q.clone(), origin);
            let simple = q.rsplit('.').next().unwrap_or(q).to_string();
            let entry = table.origins.entry(simple).or_insert(origin);
            // ProjectLocal > JavaPlatform > External when files disagree.
            if origin < *entry {
                *entry = origin;
            }
        }
    }
    table
}

/// Top-level types of `java.lang` visible without an import.
const JAVA_LANG: &[&str] = &[
    "AbstractMethodError",
    "Appendable",
    "ArithmeticException",
    "ArrayIndexOutOfBoundsException",
    "ArrayStoreException",
    "AssertionError",
    "AutoCloseable",
    "Boolean",
    "Byte",
    "CharSequence",
    "Character",
    "Class",
    "ClassCastException",
    "ClassLoader",
    "ClassNotFoundException",
    "CloneNotSupportedException",
    "Cloneable",
    "Comparable",
    "Deprecated",
    "Double",
    "Enum",
    "Error",
    "Exception",
    "ExceptionInInitializerError",
    "Float",
    "FunctionalInterface",
    "IllegalAccessException",
    "IllegalArgumentException",
    "IllegalMonitorStateException",
    "IllegalStateException",
    "IndexOutOfBoundsException",
    "InstantiationException",
    "Integer",
    "InterruptedException",
    "Iterable",
    "LinkageError",
    "Long",
    "Math",
    "NegativeArraySizeException",
    "NoClassDefFoundError",
    "NoSuchFieldException",
    "NoSuchMethodException",
    "NullPointerException",
    "Number",
    "NumberFormatException",
    "Object",
    "OutOfMemoryError",
    "Override",
    "Package",
    "Process",
    "ProcessBuilder",
    "Readable",
    "ReflectiveOperationException",
    "Runnable",
    "Runtime",
    "RuntimeException",
    "SafeVarargs",
    "SecurityException",
    "SecurityManager",
    "Short",
    "StackOverflowError",
    "StackTraceElement",
    "StrictMath",
    "String",
    "StringBuffer",
    "StringBuilder",
    "StringIndexOutOfBoundsException",
    "SuppressWarnings",
    "System",
    "Thread",
    "ThreadGroup",
    "ThreadLocal",
    "Throwable",
    "TypeNotPresentException",
    "UnsupportedOperationException",
    "VerifyError",
    "VirtualMachineError",
    "Void",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::java::{parse_java, SourceUnit};

    fn trees(files: &[(&str, &str)]) -> Vec<SyntaxTree> {
        files.iter().map(|(p, t)| parse_java(&SourceUnit::new("r", *p, *t)).unwrap()).collect()
    }

    #[test]
    fn java_lang_list_is_sorted() {
        assert!(JAVA_LANG.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn declared_imports_are_local_platform_and_external() {
        let ts = trees(&[
            ("com/acme/Foo.java", "package com.acme; public class Foo {}"),
            (
                "com/acme/app/Main.java",
                "package com.acme.app;\nimport com.acme.Foo;\nimport java.util.List;\nimport org.apache.commons.lang.StringUtils;\nclass Main {}",
            ),
        ]);
        let table = classify_type_origins(&ts);
        assert_eq!(table.origin("Foo"), TypeOrigin::ProjectLocal);
        assert_eq!(table.origin("com.acme.Foo"), TypeOrigin::ProjectLocal);
        assert_eq!(table.origin("List"), TypeOrigin::JavaPlatform);
        assert_eq!(table.origin("java.util.List"), TypeOrigin::JavaPlatform);
        assert_eq!(table.origin("StringUtils"), TypeOrigin::External);
        assert_eq!(table.origin("Nope"), TypeOrigin::Unknown);
    }

    #[test]
    fn wildcard_imports_resolve_only_declared_names() {
        let ts = trees(&[
            ("com/acme/Foo.java", "package com.acme; public class Foo {}"),
            ("x/Main.java", "package x;\nimport com.acme.*;\nimport java.util.*;\nclass Main {}"),
        ]);
        let table = classify_type_origins(&ts);
        let scope = FileScope::of(&ts[1]);
        assert_eq!(table.resolve(&scope, "Foo").origin, TypeOrigin::ProjectLocal);
        let bar = table.resolve(&scope, "Bar");
        assert_eq!(bar.origin, TypeOrigin::Unknown);
        assert_eq!(bar.candidates, vec!["com.acme.Bar", "java.util.Bar"]);
        let string = table.resolve(&scope, "String");
        assert_eq!(string.origin, TypeOrigin::JavaPlatform);
        assert_eq!(string.qualified.as_deref(), Some("java.lang.String"));
    }

    #[test]
    fn nested_and_qualified_names() {
        let ts = trees(&[(
            "p/Outer.java",
            "package p; class Outer { static class Inner {} void m(java.util.Map.Entry<String,String> e) {} }",
        )]);
        let table = classify_type_origins(&ts);
        assert!(table.declared("p.Outer.Inner").is_some());
        let scope = FileScope::of(&ts[0]);
        assert_eq!(table.resolve(&scope, "Inner").qualified.as_deref(), Some("p.Outer.Inner"));
        let entry = table.resolve(&scope, "java.util.Map.Entry");
        assert_eq!(entry.origin, TypeOrigin::JavaPlatform);
        let oi = table.resolve(&scope, "Outer.Inner");
        assert_eq!(oi.origin, TypeOrigin::ProjectLocal);
        assert_eq!(oi.qualified.as_deref(), Some("p.Outer.Inner"));
    }

    #[test]
    fn order_independent_and_idempotent() {
        let files = [
            ("a/A.java", "package a; import java.util.List; class A extends B {}"),
            ("a/B.java", "package a; import org.x.List; abstract class B { void f(int x) {} }"),
            ("a/C.java", "package a; interface C extends D {}"),
        ];
        let forward = classify_type_origins(&trees(&files));
        let mut rev = files;
        rev.reverse();
        let backward = classify_type_origins(&trees(&rev));
        assert_eq!(forward, backward);
        assert_eq!(forward, classify_type_origins(&trees(&files)));
        // Disagreeing imports: platform wins over external.
        assert_eq!(forward.origin("List"), TypeOrigin::JavaPlatform);
        let b = forward.declared("a.B").unwrap();
        assert_eq!(b.kind, DeclaredKind::AbstractClass);
        assert_eq!(b.methods, vec![MethodSig { name: "f".into(), arity: 1, private: false }]);
        assert_eq!(forward.declared("a.A").unwrap().superclass.as_deref(), Some("B"));
        assert_eq!(forward.declared("a.C").unwrap().interfaces, vec!["D".to_string()]);
    }
}
