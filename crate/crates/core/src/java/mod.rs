//! Java source parsing.
//!
//! Sources are parsed with the tree-sitter Java grammar into an immutable
//! [`SyntaxTree`]. Malformed files still produce a partial tree together with
//! the list of syntax errors; only files using syntax newer than Java SE 8 (or
//! files with no recoverable structure at all) are rejected.

mod origins;

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;
use tree_sitter::{Node, Parser, Tree};

pub(crate) use origins::{base_type_name, body_members, supertypes, written_type_name};
pub use origins::{
    classify_type_origins, DeclaredKind, DeclaredType, FileScope, OriginPolicy, Resolution, TypeOrigin, TypeOriginTable,
};

/// One Java file of a release.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub path: String,
    pub release_id: String,
    pub text: String,
}

impl SourceUnit {
    pub fn new(release_id: impl Into<String>, path: impl Into<String>, text: impl Into<String>) -> Self {
        SourceUnit { path: normalize_path(&path.into()), release_id: release_id.into(), text: text.into() }
    }

    /// Reads `root/relative` from disk. Non-UTF-8 content is rejected.
    pub fn read(root: &Path, relative: &Path, release_id: &str) -> Result<Self, ParseError> {
        let full = root.join(relative);
        let rel = normalize_path(&relative.to_string_lossy());
        let bytes =
            std::fs::read(&full).map_err(|e| ParseError::Unreadable { path: rel.clone(), reason: e.to_string() })?;
        let text = String::from_utf8(bytes)
            .map_err(|e| ParseError::Unreadable { path: rel.clone(), reason: format!("invalid UTF-8: {e}") })?;
        Ok(SourceUnit { path: rel, release_id: release_id.to_string(), text })
    }
}

/// Forward slashes, no leading `./`, case preserved.
pub fn normalize_path(path: &str) -> String {
    let mut p = path.trim().replace('\\', "/");
    while let Some(rest) = p.strip_prefix("./") {
        p = rest.to_string();
    }
    while p.contains("//") {
        p = p.replace("//", "/");
    }
    p
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("{path}: unreadable source: {reason}")]
    Unreadable { path: String, reason: String },
    #[error("{path}: no usable syntax tree: {reason}")]
    FatalParse { path: String, reason: String },
}

/// Byte offsets are half-open; lines are 1-based and inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct Span {
    pub start_byte: usize,
    pub end_byte: usize,
    pub start_line: usize,
    pub end_line: usize,
}

impl Span {
    pub fn of(node: Node<'_>) -> Self {
        Span {
            start_byte: node.start_byte(),
            end_byte: node.end_byte(),
            start_line: node.start_position().row + 1,
            end_line: node.end_position().row + 1,
        }
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start_byte <= other.start_byte && other.end_byte <= self.end_byte
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start_line, self.end_line)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyntaxError {
    pub span: Span,
    pub message: String,
}

/// An immutable parsed file. Cheap to clone and safe to share across threads.
#[derive(Clone)]
pub struct SyntaxTree {
    inner: Arc<TreeInner>,
}

struct TreeInner {
    path: String,
    release_id: String,
    source: String,
    tree: Tree,
    errors: Vec<SyntaxError>,
}

impl fmt::Debug for SyntaxTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SyntaxTree")
            .field("path", &self.inner.path)
            .field("release_id", &self.inner.release_id)
            .field("errors", &self.inner.errors.len())
            .finish()
    }
}

impl SyntaxTree {
    pub fn root(&self) -> Node<'_> {
        self.inner.tree.root_node()
    }

    pub fn source(&self) -> &str {
        &self.inner.source
    }

    pub fn path(&self) -> &str {
        &self.inner.path
    }

    pub fn release_id(&self) -> &str {
        &self.inner.release_id
    }

    pub fn errors(&self) -> &[SyntaxError] {
        &self.inner.errors
    }

    pub fn text(&self, node: Node<'_>) -> &str {
        &self.inner.source[node.byte_range()]
    }

    /// S-expression rendering of the tree, mostly useful when writing rules.
    pub fn to_sexp(&self) -> String {
        self.root().to_sexp()
    }

    /// Pre-order list of nodes whose kind is in `kinds`.
    pub fn enumerate_nodes(&self, kinds: &[&str]) -> Vec<(Node<'_>, Span)> {
        assert!(!kinds.is_empty(), "enumerate_nodes needs at least one kind");
        let mut out = Vec::new();
        for node in PreOrder::new(self.root()) {
            if kinds.contains(&node.kind()) {
                out.push((node, Span::of(node)));
            }
        }
        out
    }
}

/// Parses one unit. See the module docs for the error policy.
pub fn parse_java(unit: &SourceUnit) -> Result<SyntaxTree, ParseError> {
    let mut parser = Parser::new();
    parser.set_language(&tree_sitter_java::LANGUAGE.into()).expect("tree-sitter-java grammar is ABI compatible");
    let tree = parser
        .parse(&unit.text, None)
        .ok_or_else(|| ParseError::FatalParse { path: unit.path.clone(), reason: "parser produced no tree".into() })?;

    let root = tree.root_node();
    if let Some((kind, line)) = find_post_java8_construct(root, &unit.text) {
        return Err(ParseError::FatalParse {
            path: unit.path.clone(),
            reason: format!("{kind} at line {line} requires a Java version newer than SE 8"),
        });
    }
    let has_structure =
        (0..root.named_child_count()).filter_map(|i| root.named_child(i)).any(|c| !c.is_error() && !is_comment(c));
    if !unit.text.trim().is_empty() && !has_structure && root.has_error() {
        return Err(ParseError::FatalParse {
            path: unit.path.clone(),
            reason: "no declaration could be recovered".into(),
        });
    }

    let errors = collect_errors(root);
    Ok(SyntaxTree {
        inner: Arc::new(TreeInner {
            path: unit.path.clone(),
            release_id: unit.release_id.clone(),
            source: unit.text.clone(),
            tree,
            errors,
        }),
    })
}

pub(crate) fn is_comment(node: Node<'_>) -> bool {
    matches!(node.kind(), "line_comment" | "block_comment")
}

fn collect_errors(root: Node<'_>) -> Vec<SyntaxError> {
    let mut errors = Vec::new();
    if !root.has_error() {
        return errors;
    }
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if node.is_error() {
            errors.push(SyntaxError { span: Span::of(node), message: "unexpected input".into() });
            continue;
        }
        if node.is_missing() {
            errors.push(SyntaxError { span: Span::of(node), message: format!("missing `{}`", node.kind()) });
            continue;
        }
        if !node.has_error() {
            continue;
        }
        let mut cursor = node.walk();
        let children: Vec<_> = node.children(&mut cursor).collect();
        stack.extend(children.into_iter().rev());
    }
    errors.sort_by_key(|e| e.span);
    errors
}

const POST_JAVA8_KINDS: &[&str] = &[
    "record_declaration",
    "compact_constructor_declaration",
    "record_pattern",
    "type_pattern",
    "underscore_pattern",
    "guard",
    "permits",
    "switch_rule",
    "yield_statement",
    "module_declaration",
    "multiline_string_fragment",
    "template_expression",
    "string_interpolation",
];

fn find_post_java8_construct<'a>(root: Node<'a>, source: &str) -> Option<(&'static str, usize)> {
    for node in PreOrder::new(root) {
        if let Some(kind) = POST_JAVA8_KINDS.iter().find(|k| **k == node.kind()) {
            return Some((kind, node.start_position().row + 1));
        }
        // `var` local type inference (Java 10).
        if node.kind() == "local_variable_declaration" {
            if let Some(ty) = node.child_by_field_name("type") {
                if ty.kind() == "type_identifier" && &source[ty.byte_range()] == "var" {
                    return Some(("local `var` declaration", node.start_position().row + 1));
                }
            }
        }
        if node.kind() == "instanceof_expression" && node.child_by_field_name("name").is_some() {
            return Some(("instanceof pattern", node.start_position().row + 1));
        }
    }
    None
}

/// Pre-order iterator over all (named and anonymous) nodes below `root`.
pub struct PreOrder<'a> {
    stack: Vec<Node<'a>>,
}

impl<'a> PreOrder<'a> {
    pub fn new(root: Node<'a>) -> Self {
        PreOrder { stack: vec![root] }
    }
}

impl<'a> Iterator for PreOrder<'a> {
    type Item = Node<'a>;

    fn next(&mut self) -> Option<Node<'a>> {
        let node = self.stack.pop()?;
        for i in (0..node.child_count()).rev() {
            if let Some(c) = node.child(i) {
                self.stack.push(c);
            }
        }
        Some(node)
    }
}

/// Named children, skipping comments.
pub fn named_children(node: Node<'_>) -> Vec<Node<'_>> {
    let mut cursor = node.walk();
    node.named_children(&mut cursor).filter(|c| !is_comment(*c)).collect()
}

pub fn children(node: Node<'_>) -> Vec<Node<'_>> {
    let mut cursor = node.walk();
    node.children(&mut cursor).collect()
}

/// Whether a `modifiers` child of `decl` contains the given keyword.
pub fn has_modifier(decl: Node<'_>, keyword: &str) -> bool {
    modifiers_of(decl).map(|m| children(m).iter().any(|c| c.kind() == keyword)).unwrap_or(false)
}

pub fn modifiers_of(decl: Node<'_>) -> Option<Node<'_>> {
    children(decl).into_iter().find(|c| c.kind() == "modifiers")
}

pub(crate) const TYPE_DECLARATION_KINDS: &[&str] =
    &["class_declaration", "interface_declaration", "enum_declaration", "annotation_type_declaration"];

pub(crate) fn is_type_declaration(node: Node<'_>) -> bool {
    TYPE_DECLARATION_KINDS.contains(&node.kind())
}

fn is_uppercase_receiver(node: Node<'_>) -> bool {
    let Some(parent) = node.parent() else {
        return false;
    };
    match parent.kind() {
        "method_invocation" | "field_access" => parent.child_by_field_name("object") == Some(node),
        "method_reference" => parent.named_child(0) == Some(node),
        _ => false,
    }
}

/// Every place that names a type, with the name as written (whitespace
/// removed): type uses, annotation names, and capitalized receivers of static
/// calls and field reads such as `Files.exists` or `System.out`.
pub fn type_mention_sites(tree: &SyntaxTree) -> Vec<(Node<'_>, String)> {
    let compact = |n: Node<'_>| -> String { tree.text(n).chars().filter(|c| !c.is_whitespace()).collect() };
    let mut out = Vec::new();
    for node in PreOrder::new(tree.root()) {
        let parent_kind = node.parent().map(|p| p.kind()).unwrap_or("");
        let written = match node.kind() {
            "type_identifier" => {
                if parent_kind == "scoped_type_identifier" {
                    continue;
                }
                // The name being declared by a type parameter is not a use.
                if parent_kind == "type_parameter" && node.prev_named_sibling().is_none() {
                    continue;
                }
                tree.text(node).to_string()
            }
            "scoped_type_identifier" if parent_kind != "scoped_type_identifier" => compact(node),
            "identifier" => {
                let text = tree.text(node);
                if !text.starts_with(|c: char| c.is_uppercase()) || !is_uppercase_receiver(node) {
                    continue;
                }
                text.to_string()
            }
            "marker_annotation" | "annotation" => match node.child_by_field_name("name") {
                Some(n) => compact(n),
                None => continue,
            },
            _ => continue,
        };
        out.push((node, written));
    }
    out
}

/// Reads every `.java` file below `root` in sorted path order.
pub fn read_release(root: &Path, release_id: &str) -> std::io::Result<(Vec<SourceUnit>, Vec<ParseError>)> {
    let mut paths: Vec<PathBuf> = walkdir::WalkDir::new(root)
        .follow_links(false)
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file())
        .filter(|e| e.path().extension().is_some_and(|x| x == "java"))
        .map(|e| e.path().strip_prefix(root).unwrap_or(e.path()).to_path_buf())
        .collect();
    if !root.exists() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("source root {} does not exist", root.display()),
        ));
    }
    paths.sort();
    let mut units = Vec::new();
    let mut failures = Vec::new();
    for rel in paths {
        match SourceUnit::read(root, &rel, release_id) {
            Ok(u) => units.push(u),
            Err(e) => failures.push(e),
        }
    }
    Ok((units, failures))
}
