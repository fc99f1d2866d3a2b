use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tree_sitter::Node;

use super::lines::{classify_lines, LineKind, LineStats};
use super::{aggregate_method_level, Aggregate, NPATH_CAP, PRODUCT_METRIC_NAMES};
use crate::java::{
    body_members, classify_type_origins, has_modifier, named_children, parse_java, type_mention_sites, FileScope,
    PreOrder, SourceUnit, SyntaxTree, TypeOrigin, TypeOriginTable,
};

/// The 54 product metrics of one file plus the method-level means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductMetrics {
    /// In [`PRODUCT_METRIC_NAMES`] order.
    pub values: Vec<f64>,
    /// In [`super::EXTRA_METRIC_NAMES`] order.
    pub extras: Vec<f64>,
    /// Only line metrics were computed.
    pub parse_failed: bool,
    /// Some method's NPATH hit the cap.
    pub npath_capped: bool,
    /// No function with a body; method-level aggregates are 0.
    pub no_methods: bool,
}

impl ProductMetrics {
    pub fn get(&self, name: &str) -> Option<f64> {
        if let Some(i) = super::product_metric_index(name) {
            return Some(self.values[i]);
        }
        super::EXTRA_METRIC_NAMES.iter().position(|n| *n == name).map(|i| self.extras[i])
    }

    fn new() -> Self {
        ProductMetrics {
            values: vec![0.0; PRODUCT_METRIC_NAMES.len()],
            extras: vec![0.0; super::EXTRA_METRIC_NAMES.len()],
            parse_failed: false,
            npath_capped: false,
            no_methods: true,
        }
    }

    fn set(&mut self, name: &str, v: f64) {
        let i = super::product_metric_index(name).unwrap_or_else(|| panic!("unknown metric {name}"));
        self.values[i] = v;
    }

    /// Line metrics only, for files that did not parse.
    pub fn lines_only(text: &str) -> Self {
        let kinds = classify_lines(text);
        let mut m = ProductMetrics::new();
        m.parse_failed = true;
        m.set_line_totals(&kinds);
        m
    }

    fn set_line_totals(&mut self, kinds: &[LineKind]) {
        let s = LineStats::over(kinds, 1, kinds.len());
        self.set("CountLine", s.lines as f64);
        self.set("CountLineBlank", s.blank as f64);
        self.set("CountLineCode", s.code as f64);
        self.set("CountLineComment", s.comment as f64);
        let ratio = if s.code == 0 { 0.0 } else { s.comment as f64 / s.code as f64 };
        self.set("RatioCommentToCode", ratio);
    }
}

const FUNCTION_KINDS: &[&str] = &["method_declaration", "constructor_declaration"];

/// Nodes that start a separate scope for per-method measures.
fn is_scope_boundary(node: Node<'_>) -> bool {
    matches!(
        node.kind(),
        "class_body"
            | "class_declaration"
            | "interface_declaration"
            | "enum_declaration"
            | "annotation_type_declaration"
    )
}

/// Pre-order named nodes below `root`, not descending into nested classes.
fn own_nodes(root: Node<'_>) -> Vec<Node<'_>> {
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(n) = stack.pop() {
        out.push(n);
        let kids = named_children(n);
        for c in kids.into_iter().rev() {
            if !is_scope_boundary(c) {
                stack.push(c);
            }
        }
    }
    out
}

fn is_loop(kind: &str) -> bool {
    matches!(kind, "for_statement" | "enhanced_for_statement" | "while_statement" | "do_statement")
}

fn binary_operator<'a>(node: Node<'a>) -> Option<&'static str> {
    node.child_by_field_name("operator").map(|o| o.kind())
}

fn is_short_circuit(node: Node<'_>) -> bool {
    node.kind() == "binary_expression" && matches!(binary_operator(node), Some("&&" | "||"))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Complexity {
    cyclomatic: f64,
    modified: f64,
    strict: f64,
    essential: f64,
}

fn complexity(tree: &SyntaxTree, body: Node<'_>) -> Complexity {
    let nodes = own_nodes(body);
    let mut decisions = 0.0;
    let mut cases = 0.0;
    let mut switches = 0.0;
    let mut logical = 0.0;
    for n in &nodes {
        match n.kind() {
            "if_statement"
            | "for_statement"
            | "enhanced_for_statement"
            | "while_statement"
            | "do_statement"
            | "catch_clause"
            | "ternary_expression" => decisions += 1.0,
            "switch_expression" => switches += 1.0,
            "switch_label" if tree.text(*n).trim_start().starts_with("case") => cases += 1.0,
            _ if is_short_circuit(*n) => logical += 1.0,
            _ => {}
        }
    }
    let cyclomatic = 1.0 + decisions + cases;
    let modified = 1.0 + decisions + switches;
    let strict = cyclomatic + logical;
    let essential = (1.0 + unstructured_constructs(tree, &nodes) as f64).min(modified);
    Complexity { cyclomatic, modified, strict, essential }
}

/// Target of a `break`/`continue`: the labeled statement's body for labeled
/// jumps, else the nearest enclosing loop (or switch, for `break`).
fn jump_target<'a>(tree: &SyntaxTree, jump: Node<'a>) -> Option<Node<'a>> {
    let label = named_children(jump).into_iter().find(|c| c.kind() == "identifier").map(|l| tree.text(l).to_string());
    let mut cur = jump.parent();
    while let Some(p) = cur {
        if matches!(p.kind(), "lambda_expression" | "method_declaration" | "constructor_declaration" | "class_body") {
            return None;
        }
        match &label {
            Some(l) => {
                if p.kind() == "labeled_statement" && named_children(p).first().is_some_and(|id| tree.text(*id) == l) {
                    return named_children(p).into_iter().nth(1);
                }
            }
            None => {
                if is_loop(p.kind()) || (jump.kind() == "break_statement" && p.kind() == "switch_expression") {
                    return Some(p);
                }
            }
        }
        cur = p.parent();
    }
    None
}

fn is_proper_ancestor(a: Node<'_>, b: Node<'_>) -> bool {
    let mut cur = b.parent();
    while let Some(p) = cur {
        if p == a {
            return true;
        }
        cur = p.parent();
    }
    false
}

/// Control constructs left with more than one exit by a return, or by a
/// break/continue that leaves them. Each such construct adds one to
/// essential complexity.
fn unstructured_constructs(tree: &SyntaxTree, nodes: &[Node<'_>]) -> usize {
    let constructs: Vec<Node<'_>> = nodes
        .iter()
        .copied()
        .filter(|n| n.kind() == "if_statement" || n.kind() == "switch_expression" || is_loop(n.kind()))
        .collect();
    let jumps: Vec<(Node<'_>, Option<Node<'_>>)> = nodes
        .iter()
        .copied()
        .filter(|n| matches!(n.kind(), "return_statement" | "break_statement" | "continue_statement"))
        .filter(|n| !inside_lambda(*n))
        .map(|n| (n, jump_target(tree, n)))
        .collect();
    constructs
        .iter()
        .filter(|c| {
            jumps.iter().any(|(j, target)| {
                if !is_proper_ancestor(**c, *j) {
                    return false;
                }
                match (j.kind(), target) {
                    ("return_statement", _) => true,
                    ("break_statement", Some(t)) => is_proper_ancestor(*t, **c) || (*t == **c && is_loop(c.kind())),
                    ("continue_statement", Some(t)) => is_proper_ancestor(*t, **c),
                    _ => false,
                }
            })
        })
        .count()
}

fn inside_lambda(node: Node<'_>) -> bool {
    let mut cur = node.parent();
    while let Some(p) = cur {
        match p.kind() {
            "lambda_expression" => return true,
            "method_declaration" | "constructor_declaration" => return false,
            _ => cur = p.parent(),
        }
    }
    false
}

const NESTING_KINDS: &[&str] = &[
    "if_statement",
    "for_statement",
    "enhanced_for_statement",
    "while_statement",
    "do_statement",
    "switch_expression",
    "try_statement",
    "try_with_resources_statement",
    "synchronized_statement",
];

fn max_nesting(node: Node<'_>, depth: usize) -> usize {
    let mut best = depth;
    for c in named_children(node) {
        if is_scope_boundary(c) {
            continue;
        }
        let is_else_if = c.kind() == "if_statement"
            && node.kind() == "if_statement"
            && node.child_by_field_name("alternative") == Some(c);
        let d = if NESTING_KINDS.contains(&c.kind()) && !is_else_if { depth + 1 } else { depth };
        best = best.max(max_nesting(c, d));
    }
    best
}

fn count_in(node: Node<'_>, pred: &dyn Fn(Node<'_>) -> bool) -> usize {
    own_nodes(node).into_iter().filter(|n| pred(*n)).count()
}

fn bool_ops(node: Option<Node<'_>>) -> f64 {
    node.map(|n| count_in(n, &is_short_circuit) as f64).unwrap_or(0.0)
}

/// NPATH of a statement, saturating at the cap.
fn npath(node: Node<'_>) -> f64 {
    let v = match node.kind() {
        "block" | "constructor_body" | "switch_block_statement_group" => {
            let mut p = 1.0;
            for c in named_children(node) {
                if c.kind() == "switch_label" {
                    continue;
                }
                p *= npath(c);
            }
            p
        }
        "if_statement" => {
            let then = node.child_by_field_name("consequence").map(npath).unwrap_or(1.0);
            let other = node.child_by_field_name("alternative").map(npath).unwrap_or(1.0);
            then + other + bool_ops(node.child_by_field_name("condition"))
        }
        "while_statement" | "do_statement" | "for_statement" | "enhanced_for_statement" => {
            let body = node.child_by_field_name("body").map(npath).unwrap_or(1.0);
            body + 1.0 + bool_ops(node.child_by_field_name("condition"))
        }
        "switch_expression" => {
            let mut sum = 0.0;
            let mut has_default = false;
            if let Some(b) = node.child_by_field_name("body") {
                for g in named_children(b) {
                    if named_children(g).iter().any(|l| l.kind() == "switch_label" && l.named_child_count() == 0) {
                        has_default = true;
                    }
                    // Labels that fall through to the next group share its paths.
                    if named_children(g).iter().any(|c| c.kind() != "switch_label") {
                        sum += npath(g);
                    }
                }
            }
            if !has_default {
                sum += 1.0;
            }
            sum + bool_ops(node.child_by_field_name("condition"))
        }
        "try_statement" | "try_with_resources_statement" => {
            let mut body = node.child_by_field_name("body").map(npath).unwrap_or(1.0);
            let mut fin = 1.0;
            for c in named_children(node) {
                match c.kind() {
                    "catch_clause" => body += c.child_by_field_name("body").map(npath).unwrap_or(1.0),
                    "finally_clause" => fin = named_children(c).first().copied().map(npath).unwrap_or(1.0),
                    _ => {}
                }
            }
            body * fin
        }
        "labeled_statement" => named_children(node).into_iter().nth(1).map(npath).unwrap_or(1.0),
        "synchronized_statement" => node.child_by_field_name("body").map(npath).unwrap_or(1.0),
        k if is_scope_boundary(node) || k.ends_with("_declaration") && k != "local_variable_declaration" => 1.0,
        _ => {
            // Simple statement: each ternary doubles the paths.
            let ternaries = count_in(node, &|n| n.kind() == "ternary_expression" && !inside_lambda_below(n, node));
            2f64.powi(ternaries.min(64) as i32)
        }
    };
    v.min(NPATH_CAP)
}

fn inside_lambda_below(n: Node<'_>, top: Node<'_>) -> bool {
    let mut cur = n.parent();
    while let Some(p) = cur {
        if p == top {
            return false;
        }
        if p.kind() == "lambda_expression" {
            return true;
        }
        cur = p.parent();
    }
    false
}

/// Declared variable names inside a function that shadow fields.
fn local_names(tree: &SyntaxTree, func: Node<'_>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for n in own_nodes(func) {
        let name = match n.kind() {
            "variable_declarator"
            | "formal_parameter"
            | "catch_formal_parameter"
            | "resource"
            | "enhanced_for_statement" => n.child_by_field_name("name"),
            "spread_parameter" => named_children(n)
                .into_iter()
                .find(|c| c.kind() == "variable_declarator")
                .and_then(|d| d.child_by_field_name("name")),
            "lambda_expression" => {
                if let Some(p) = n.child_by_field_name("parameters") {
                    if p.kind() == "identifier" {
                        out.insert(tree.text(p).to_string());
                    } else {
                        for c in own_nodes(p) {
                            if c.kind() == "identifier" && c.parent().is_some_and(|pp| pp.kind() != "formal_parameter")
                            {
                                out.insert(tree.text(c).to_string());
                            }
                        }
                    }
                }
                None
            }
            _ => None,
        };
        if let Some(id) = name {
            out.insert(tree.text(id).to_string());
        }
    }
    out
}

#[derive(Debug, Default, Clone)]
struct FieldUse {
    read: BTreeSet<String>,
    written: BTreeSet<String>,
}

fn is_write_target(node: Node<'_>) -> bool {
    let Some(p) = node.parent() else {
        return false;
    };
    match p.kind() {
        "assignment_expression" => p.child_by_field_name("left") == Some(node),
        "update_expression" => true,
        _ => false,
    }
}

fn is_compound_assignment(node: Node<'_>) -> bool {
    node.parent().is_some_and(|p| {
        p.kind() == "update_expression"
            || (p.kind() == "assignment_expression" && binary_operator(p).is_some_and(|op| op != "="))
    })
}

fn field_use(tree: &SyntaxTree, func: Node<'_>, fields: &BTreeSet<String>) -> FieldUse {
    let locals = local_names(tree, func);
    let mut u = FieldUse::default();
    for n in own_nodes(func) {
        let (site, name) = match n.kind() {
            "identifier" => {
                let Some(p) = n.parent() else { continue };
                let is_member_name = match p.kind() {
                    "field_access" => p.child_by_field_name("field") == Some(n),
                    "method_invocation" => p.child_by_field_name("name") == Some(n),
                    "variable_declarator"
                    | "formal_parameter"
                    | "catch_formal_parameter"
                    | "method_declaration"
                    | "constructor_declaration"
                    | "labeled_statement"
                    | "break_statement"
                    | "continue_statement"
                    | "method_reference"
                    | "resource"
                    | "enhanced_for_statement"
                    | "lambda_expression"
                    | "inferred_parameters" => true,
                    _ => false,
                };
                let text = tree.text(n);
                if is_member_name || locals.contains(text) {
                    continue;
                }
                (n, text.to_string())
            }
            "field_access" => {
                let object = n.child_by_field_name("object");
                if !object.is_some_and(|o| o.kind() == "this") {
                    continue;
                }
                match n.child_by_field_name("field") {
                    Some(f) => (n, tree.text(f).to_string()),
                    None => continue,
                }
            }
            _ => continue,
        };
        if !fields.contains(&name) {
            continue;
        }
        if is_write_target(site) {
            u.written.insert(name.clone());
            if is_compound_assignment(site) {
                u.read.insert(name);
            }
        } else {
            u.read.insert(name);
        }
    }
    u
}

fn callee_names(tree: &SyntaxTree, func: Node<'_>) -> BTreeSet<String> {
    own_nodes(func)
        .into_iter()
        .filter(|n| n.kind() == "method_invocation")
        .filter_map(|n| n.child_by_field_name("name"))
        .map(|n| tree.text(n).to_string())
        .collect()
}

fn field_names_of(tree: &SyntaxTree, body: Node<'_>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for m in body_members(body) {
        if matches!(m.kind(), "field_declaration" | "constant_declaration") {
            let mut cursor = m.walk();
            for d in m.children_by_field_name("declarator", &mut cursor) {
                if let Some(n) = d.child_by_field_name("name") {
                    out.insert(tree.text(n).to_string());
                }
            }
        }
    }
    out
}

fn arity(func: Node<'_>) -> usize {
    func.child_by_field_name("parameters")
        .map(|p| {
            named_children(p).iter().filter(|c| matches!(c.kind(), "formal_parameter" | "spread_parameter")).count()
        })
        .unwrap_or(0)
}

struct FunctionFacts {
    name: String,
    complexity: Complexity,
    lines: LineStats,
    nesting: f64,
    npath: f64,
    callees: BTreeSet<String>,
    fields: FieldUse,
}

const DECL_STATEMENTS: &[&str] = &[
    "package_declaration",
    "import_declaration",
    "class_declaration",
    "interface_declaration",
    "enum_declaration",
    "annotation_type_declaration",
    "annotation_type_element_declaration",
    "method_declaration",
    "constructor_declaration",
    "field_declaration",
    "constant_declaration",
    "local_variable_declaration",
];

const EXE_STATEMENTS: &[&str] = &[
    "expression_statement",
    "if_statement",
    "for_statement",
    "enhanced_for_statement",
    "while_statement",
    "do_statement",
    "return_statement",
    "break_statement",
    "continue_statement",
    "throw_statement",
    "try_statement",
    "try_with_resources_statement",
    "synchronized_statement",
    "assert_statement",
    "explicit_constructor_invocation",
    "switch_expression",
];

const STATEMENT_PARENTS: &[&str] = &[
    "block",
    "constructor_body",
    "switch_block_statement_group",
    "labeled_statement",
    "if_statement",
    "for_statement",
    "enhanced_for_statement",
    "while_statement",
    "do_statement",
];

fn is_statement(node: Node<'_>) -> bool {
    let k = node.kind();
    if DECL_STATEMENTS.contains(&k) {
        return true;
    }
    if k == "switch_expression" {
        return node.parent().is_some_and(|p| STATEMENT_PARENTS.contains(&p.kind()));
    }
    EXE_STATEMENTS.contains(&k)
}

/// 1-based line range of the part of a statement that is not a nested body.
fn header_lines(node: Node<'_>) -> Vec<(usize, usize)> {
    let start = node.start_position().row + 1;
    let end = node.end_position().row + 1;
    let body_field = match node.kind() {
        "class_declaration"
        | "interface_declaration"
        | "enum_declaration"
        | "annotation_type_declaration"
        | "method_declaration"
        | "constructor_declaration"
        | "for_statement"
        | "enhanced_for_statement"
        | "while_statement"
        | "try_statement"
        | "try_with_resources_statement"
        | "synchronized_statement"
        | "switch_expression" => "body",
        "if_statement" => "consequence",
        "do_statement" => {
            let cond = node.child_by_field_name("condition").map(|c| (c.start_position().row + 1, end));
            return std::iter::once((start, start)).chain(cond).collect();
        }
        _ => return vec![(start, end)],
    };
    match node.child_by_field_name(body_field) {
        Some(b) => vec![(start, b.start_position().row + 1)],
        None => vec![(start, end)],
    }
}

/// Metrics of one parsed file. `origins` supplies the release-wide type
/// hierarchy used by the class-level metrics.
pub fn compute_product_metrics(tree: &SyntaxTree, origins: &TypeOriginTable) -> ProductMetrics {
    let kinds = classify_lines(tree.source());
    let mut m = ProductMetrics::new();
    m.set_line_totals(&kinds);
    let root = tree.root();
    let all: Vec<Node<'_>> = PreOrder::new(root).filter(|n| n.is_named()).collect();

    // Declarations.
    let type_decls = all
        .iter()
        .filter(|n| {
            matches!(
                n.kind(),
                "class_declaration" | "interface_declaration" | "enum_declaration" | "annotation_type_declaration"
            )
        })
        .count();
    m.set("CountDeclClass", type_decls as f64);

    let functions: Vec<Node<'_>> = all.iter().copied().filter(|n| FUNCTION_KINDS.contains(&n.kind())).collect();
    let (mut class_methods, mut instance_methods) = (0, 0);
    let (mut public, mut private, mut protected, mut default) = (0, 0, 0, 0);
    for f in &functions {
        let owner_kind = f.parent().and_then(|b| b.parent()).map(|o| o.kind()).unwrap_or("");
        let in_interface = owner_kind == "interface_declaration";
        let in_enum = f.parent().is_some_and(|p| p.kind() == "enum_body_declarations");
        if f.kind() == "method_declaration" {
            if has_modifier(*f, "static") {
                class_methods += 1;
            } else {
                instance_methods += 1;
            }
        }
        if has_modifier(*f, "public") || (in_interface && !has_modifier(*f, "private")) {
            public += 1;
        } else if has_modifier(*f, "private") || (in_enum && f.kind() == "constructor_declaration") {
            private += 1;
        } else if has_modifier(*f, "protected") {
            protected += 1;
        } else {
            default += 1;
        }
    }
    m.set("CountDeclMethod", functions.len() as f64);
    m.set("CountDeclClassMethod", class_methods as f64);
    m.set("CountDeclInstanceMethod", instance_methods as f64);
    m.set("CountDeclMethodPublic", public as f64);
    m.set("CountDeclMethodPrivate", private as f64);
    m.set("CountDeclMethodProtected", protected as f64);
    m.set("CountDeclMethodDefault", default as f64);

    let (mut class_vars, mut instance_vars) = (0, 0);
    for n in &all {
        if !matches!(n.kind(), "field_declaration" | "constant_declaration") {
            continue;
        }
        let mut cursor = n.walk();
        let declarators = n.children_by_field_name("declarator", &mut cursor).count();
        let in_interface = n
            .parent()
            .and_then(|b| b.parent())
            .is_some_and(|o| matches!(o.kind(), "interface_declaration" | "annotation_type_declaration"));
        if has_modifier(*n, "static") || in_interface {
            class_vars += declarators;
        } else {
            instance_vars += declarators;
        }
    }
    m.set("CountDeclClassVariable", class_vars as f64);
    m.set("CountDeclInstanceVariable", instance_vars as f64);

    // Statements and semicolons.
    let statements: Vec<Node<'_>> = all.iter().copied().filter(|n| is_statement(*n)).collect();
    let decl: Vec<_> = statements.iter().filter(|n| DECL_STATEMENTS.contains(&n.kind())).collect();
    let exe: Vec<_> = statements.iter().filter(|n| !DECL_STATEMENTS.contains(&n.kind())).collect();
    m.set("CountStmt", statements.len() as f64);
    m.set("CountStmtDecl", decl.len() as f64);
    m.set("CountStmtExe", exe.len() as f64);
    let semicolons = PreOrder::new(root).filter(|n| !n.is_named() && n.kind() == ";").count();
    m.set("CountSemicolon", semicolons as f64);

    let mark = |nodes: &[&Node<'_>]| -> usize {
        let mut lines = BTreeSet::new();
        for n in nodes {
            for (a, b) in header_lines(**n) {
                for l in a..=b {
                    if kinds.get(l - 1).is_some_and(|k| k.code) {
                        lines.insert(l);
                    }
                }
            }
        }
        lines.len()
    };
    m.set("CountLineCodeDecl", mark(&decl) as f64);
    m.set("CountLineCodeExe", mark(&exe) as f64);

    // Per-function measures.
    let mut facts = Vec::new();
    for f in &functions {
        let body = f.child_by_field_name("body");
        let Some(body) = body else { continue };
        let owner_body = f.parent();
        let fields = owner_body.map(|b| field_names_of(tree, b)).unwrap_or_default();
        let name = f.child_by_field_name("name").map(|n| tree.text(n).to_string()).unwrap_or_default();
        facts.push(FunctionFacts {
            name,
            complexity: complexity(tree, body),
            lines: LineStats::over(&kinds, f.start_position().row + 1, f.end_position().row + 1),
            nesting: max_nesting(body, 0) as f64,
            npath: npath(body),
            callees: callee_names(tree, body),
            fields: field_use(tree, *f, &fields),
        });
    }
    m.set("CountDeclFunction", facts.len() as f64);
    m.no_methods = facts.is_empty();
    m.npath_capped = facts.iter().any(|f| f.npath >= NPATH_CAP);

    let sum = |get: &dyn Fn(&FunctionFacts) -> f64| facts.iter().map(get).sum::<f64>();
    let max = |get: &dyn Fn(&FunctionFacts) -> f64| facts.iter().map(get).fold(0.0, f64::max);
    let avg = |get: &dyn Fn(&FunctionFacts) -> f64| {
        if facts.is_empty() {
            0.0
        } else {
            sum(get) / facts.len() as f64
        }
    };
    m.set("SumCyclomatic", sum(&|f| f.complexity.cyclomatic));
    m.set("SumCyclomaticModified", sum(&|f| f.complexity.modified));
    m.set("SumCyclomaticStrict", sum(&|f| f.complexity.strict));
    m.set("SumEssential", sum(&|f| f.complexity.essential));
    m.set("MaxCyclomatic", max(&|f| f.complexity.cyclomatic));
    m.set("MaxCyclomaticModified", max(&|f| f.complexity.modified));
    m.set("MaxCyclomaticStrict", max(&|f| f.complexity.strict));
    m.set("AvgCyclomatic", avg(&|f| f.complexity.cyclomatic));
    m.set("AvgCyclomaticModified", avg(&|f| f.complexity.modified));
    m.set("AvgCyclomaticStrict", avg(&|f| f.complexity.strict));
    m.set("AvgEssential", avg(&|f| f.complexity.essential));
    m.set("AvgLine", avg(&|f| f.lines.lines as f64));
    m.set("AvgLineBlank", avg(&|f| f.lines.blank as f64));
    m.set("AvgLineCode", avg(&|f| f.lines.code as f64));
    m.set("AvgLineComment", avg(&|f| f.lines.comment as f64));

    // Fan-in counts callers within the file by name.
    let inputs: Vec<f64> = facts
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let callers = facts.iter().enumerate().filter(|(j, g)| *j != i && g.callees.contains(&f.name)).count();
            (callers + f.fields.read.len()) as f64
        })
        .collect();
    let outputs: Vec<f64> = facts.iter().map(|f| (f.callees.len() + f.fields.written.len()) as f64).collect();
    let paths: Vec<f64> = facts.iter().map(|f| f.npath).collect();
    let nesting: Vec<f64> = facts.iter().map(|f| f.nesting).collect();
    for (prefix, values, extra) in [
        ("CountInput", &inputs, 0),
        ("CountOutput", &outputs, 1),
        ("CountPath", &paths, 2),
        ("MaxNesting", &nesting, 3),
    ] {
        m.set(&format!("{prefix}_Min"), aggregate_method_level(values, Aggregate::Min).0);
        m.set(&format!("{prefix}_Median"), aggregate_method_level(values, Aggregate::Median).0);
        m.set(&format!("{prefix}_Max"), aggregate_method_level(values, Aggregate::Max).0);
        m.extras[extra] = aggregate_method_level(values, Aggregate::Mean).0;
    }

    class_metrics(tree, origins, &mut m);
    m
}

/// The type a file is about: the top-level type named like the file, else the
/// first top-level type.
fn primary_type<'a>(tree: &'a SyntaxTree) -> Option<Node<'a>> {
    let stem = std::path::Path::new(tree.path()).file_stem().and_then(|s| s.to_str()).unwrap_or("");
    let tops: Vec<Node<'_>> =
        named_children(tree.root()).into_iter().filter(|n| crate::java::is_type_declaration(*n)).collect();
    tops.iter()
        .copied()
        .find(|n| n.child_by_field_name("name").is_some_and(|id| tree.text(id) == stem))
        .or_else(|| tops.first().copied())
}

fn resolve_in_package<'t>(
    origins: &'t TypeOriginTable,
    simple: &str,
    package: &str,
) -> Option<&'t crate::java::DeclaredType> {
    let decls = origins.declared_by_simple(simple);
    decls.iter().find(|d| d.package == package).or_else(|| decls.first()).copied()
}

fn parents_of(d: &crate::java::DeclaredType) -> BTreeSet<&str> {
    d.superclass.iter().chain(d.interfaces.iter()).map(|s| s.as_str()).collect()
}

fn inheritance_depth(origins: &TypeOriginTable, d: &crate::java::DeclaredType, seen: &mut BTreeSet<String>) -> usize {
    if !seen.insert(d.qualified.clone()) {
        return 1;
    }
    let mut depth = 1;
    for p in parents_of(d) {
        let parent_depth = match resolve_in_package(origins, p, &d.package) {
            Some(pd) => inheritance_depth(origins, pd, seen),
            // A parent outside the release sits directly below the root.
            None => 1,
        };
        depth = depth.max(parent_depth + 1);
    }
    seen.remove(&d.qualified);
    depth
}

fn class_metrics(tree: &SyntaxTree, origins: &TypeOriginTable, m: &mut ProductMetrics) {
    let Some(decl) = primary_type(tree) else {
        return;
    };
    let scope = FileScope::of(tree);
    let simple = decl.child_by_field_name("name").map(|n| tree.text(n).to_string()).unwrap_or_default();
    let qualified = if scope.package.is_empty() { simple.clone() } else { format!("{}.{simple}", scope.package) };
    let declared = origins.declared(&qualified);

    // Coupling: distinct other types named inside the class.
    let type_params: BTreeSet<String> = PreOrder::new(decl)
        .filter(|n| n.kind() == "type_parameter")
        .filter_map(|n| named_children(n).into_iter().find(|c| c.kind() == "type_identifier"))
        .map(|n| tree.text(n).to_string())
        .collect();
    let coupled: BTreeSet<String> = type_mention_sites(tree)
        .into_iter()
        .filter(|(n, _)| n.start_byte() >= decl.start_byte() && n.end_byte() <= decl.end_byte())
        .map(|(_, w)| w)
        .filter(|w| *w != simple && !type_params.contains(w))
        .map(|w| {
            let r = origins.resolve(&scope, &w);
            match (r.origin, r.qualified) {
                (TypeOrigin::Unknown, _) | (_, None) => w,
                (_, Some(q)) => q,
            }
        })
        .filter(|q| *q != qualified)
        .collect();
    m.set("CountClassCoupled", coupled.len() as f64);

    if let Some(d) = declared {
        let children = origins
            .declared_types()
            .filter(|c| c.qualified != d.qualified)
            .filter(|c| {
                parents_of(c)
                    .into_iter()
                    .any(|p| resolve_in_package(origins, p, &c.package).is_some_and(|pd| pd.qualified == d.qualified))
            })
            .count();
        m.set("CountClassDerived", children as f64);
        m.set("MaxInheritanceTree", inheritance_depth(origins, d, &mut BTreeSet::new()) as f64);
    }

    let Some(body) = decl.child_by_field_name("body") else {
        return;
    };
    let fields = field_names_of(tree, body);
    let methods: Vec<Node<'_>> = body_members(body)
        .into_iter()
        .filter(|n| n.kind() == "method_declaration" && n.child_by_field_name("body").is_some())
        .collect();
    let lcom = if fields.is_empty() || methods.is_empty() {
        0.0
    } else {
        let uses: Vec<FieldUse> = methods.iter().map(|f| field_use(tree, *f, &fields)).collect();
        let mean_fraction = fields
            .iter()
            .map(|f| {
                let users = uses.iter().filter(|u| u.read.contains(f) || u.written.contains(f)).count();
                users as f64 / methods.len() as f64
            })
            .sum::<f64>()
            / fields.len() as f64;
        100.0 * (1.0 - mean_fraction)
    };
    m.set("PercentLackOfCohesion", lcom);

    // Own methods and constructors plus visible inherited methods.
    let own: Vec<(String, usize)> = body_members(body)
        .into_iter()
        .filter(|n| FUNCTION_KINDS.contains(&n.kind()))
        .map(|n| (n.child_by_field_name("name").map(|id| tree.text(id).to_string()).unwrap_or_default(), arity(n)))
        .collect();
    let mut signatures: BTreeSet<(String, usize)> = own.iter().cloned().collect();
    let mut inherited = 0;
    if let Some(d) = declared {
        let mut seen = BTreeSet::from([d.qualified.clone()]);
        let mut queue = vec![d];
        while let Some(cur) = queue.pop() {
            for p in parents_of(cur) {
                if let Some(pd) = resolve_in_package(origins, p, &cur.package) {
                    if !seen.insert(pd.qualified.clone()) {
                        continue;
                    }
                    for sig in pd.methods.iter().filter(|s| !s.private) {
                        if signatures.insert((sig.name.clone(), sig.arity)) {
                            inherited += 1;
                        }
                    }
                    queue.push(pd);
                }
            }
        }
    }
    m.set("CountDeclMethodAll", (own.len() + inherited) as f64);
}

/// Parses every unit and computes product metrics against the release's own
/// origin table. Files that fail to parse get line metrics only.
pub fn compute_release_product_metrics(units: &[SourceUnit]) -> BTreeMap<String, ProductMetrics> {
    let parsed: Vec<_> = units.par_iter().map(parse_java).collect();
    let trees: Vec<SyntaxTree> = parsed.iter().filter_map(|p| p.as_ref().ok().cloned()).collect();
    let origins = classify_type_origins(&trees);
    units
        .par_iter()
        .zip(parsed.par_iter())
        .map(|(u, p)| {
            let metrics = match p {
                Ok(t) => compute_product_metrics(t, &origins),
                Err(_) => ProductMetrics::lines_only(&u.text),
            };
            (u.path.clone(), metrics)
        })
        .collect()
}
