//! Concrete syntax trees for single C/C++ functions.
//!
//! Source text is parsed with the tree-sitter C++ grammar first and the C
//! grammar as a fallback; the resulting tree is copied into an immutable
//! arena so that trees are `Send + Sync` and cheap to traverse. Most of the
//! crate works on the *named view* of a tree: anonymous tokens are skipped
//! and named nodes below an anonymous node are re-parented to the nearest
//! named ancestor.

mod categories;

use std::borrow::Cow;
use std::cell::RefCell;
use std::fmt;
use std::ops::Range;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use categories::{category_matches, KindRule, NodeCategoryTable};

/// Grammar used to parse a function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    C,
    Cpp,
}

/// One function definition to analyze.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceFunction {
    pub id: String,
    pub code: String,
    /// `None` selects the grammar automatically.
    pub dialect: Option<Dialect>,
}

impl SourceFunction {
    pub fn new(id: impl Into<String>, code: impl Into<String>) -> Self {
        SourceFunction {
            id: id.into(),
            code: code.into(),
            dialect: None,
        }
    }

    pub fn with_dialect(mut self, dialect: Dialect) -> Self {
        self.dialect = Some(dialect);
        self
    }
}

/// Index of a node inside its [`SyntaxTree`]. Ids follow pre-order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

const NOT_NAMED: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct NodeData {
    kind: Cow<'static, str>,
    field: Option<Cow<'static, str>>,
    named: bool,
    span: Range<usize>,
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    named_children: Vec<NodeId>,
    named_parent: Option<NodeId>,
    /// Position in `SyntaxTree::named_order`, or `NOT_NAMED`.
    named_pos: u32,
    /// Exclusive end of the named subtree in `named_order`.
    named_end: u32,
}

/// Immutable syntax tree of one function.
#[derive(Clone, Debug)]
pub struct SyntaxTree {
    nodes: Vec<NodeData>,
    named_order: Vec<NodeId>,
    source: SourceFunction,
    parse_error: bool,
    dialect: Option<Dialect>,
}

impl SyntaxTree {
    pub fn root(&self) -> SyntaxNode<'_> {
        SyntaxNode {
            tree: self,
            id: NodeId(0),
        }
    }

    pub fn node(&self, id: NodeId) -> SyntaxNode<'_> {
        assert!(id.index() < self.nodes.len(), "node id out of range");
        SyntaxNode { tree: self, id }
    }

    pub fn source(&self) -> &SourceFunction {
        &self.source
    }

    pub fn parse_error(&self) -> bool {
        self.parse_error
    }

    /// Grammar that produced the tree (`None` for hand-built trees).
    pub fn dialect(&self) -> Option<Dialect> {
        self.dialect
    }

    /// Total number of nodes, named and anonymous.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn named_count(&self) -> usize {
        self.named_order.len()
    }

    /// Named nodes in pre-order.
    pub fn named_nodes(&self) -> impl ExactSizeIterator<Item = SyntaxNode<'_>> + '_ {
        self.named_order
            .iter()
            .map(move |&id| SyntaxNode { tree: self, id })
    }

    /// Named node at position `pos` of the named pre-order.
    pub fn named_at(&self, pos: usize) -> SyntaxNode<'_> {
        SyntaxNode {
            tree: self,
            id: self.named_order[pos],
        }
    }

    fn data(&self, id: NodeId) -> &NodeData {
        &self.nodes[id.index()]
    }
}

/// Borrowed handle to a node of a [`SyntaxTree`].
#[derive(Clone, Copy)]
pub struct SyntaxNode<'t> {
    tree: &'t SyntaxTree,
    id: NodeId,
}

impl fmt::Debug for SyntaxNode<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{:?}", self.kind(), self.span())
    }
}

impl PartialEq for SyntaxNode<'_> {
    fn eq(&self, other: &Self) -> bool {
        std::ptr::eq(self.tree, other.tree) && self.id == other.id
    }
}

impl Eq for SyntaxNode<'_> {}

impl<'t> SyntaxNode<'t> {
    pub fn id(self) -> NodeId {
        self.id
    }

    pub fn tree(self) -> &'t SyntaxTree {
        self.tree
    }

    pub fn kind(self) -> &'t str {
        &self.tree.data(self.id).kind
    }

    /// Field this node occupies in its parent, e.g. `alternative`.
    pub fn field_label(self) -> Option<&'t str> {
        self.tree.data(self.id).field.as_deref()
    }

    pub fn is_named(self) -> bool {
        self.tree.data(self.id).named
    }

    pub fn is_error(self) -> bool {
        self.kind() == "ERROR"
    }

    pub fn span(self) -> Range<usize> {
        self.tree.data(self.id).span.clone()
    }

    pub fn text(self) -> &'t str {
        let code = &self.tree.source.code;
        code.get(self.span()).unwrap_or("")
    }

    pub fn parent(self) -> Option<SyntaxNode<'t>> {
        self.tree.data(self.id).parent.map(|id| self.with(id))
    }

    /// Nearest named ancestor.
    pub fn named_parent(self) -> Option<SyntaxNode<'t>> {
        self.tree.data(self.id).named_parent.map(|id| self.with(id))
    }

    /// All direct children, named and anonymous.
    pub fn children(self) -> impl ExactSizeIterator<Item = SyntaxNode<'t>> + 't {
        let tree = self.tree;
        tree.data(self.id)
            .children
            .iter()
            .map(move |&id| SyntaxNode { tree, id })
    }

    /// Children in the named view.
    pub fn named_children(self) -> impl ExactSizeIterator<Item = SyntaxNode<'t>> + 't {
        let tree = self.tree;
        tree.data(self.id)
            .named_children
            .iter()
            .map(move |&id| SyntaxNode { tree, id })
    }

    pub fn named_child_count(self) -> usize {
        self.tree.data(self.id).named_children.len()
    }

    /// First direct child occupying `field`.
    pub fn child_by_field(self, field: &str) -> Option<SyntaxNode<'t>> {
        self.children().find(|c| c.field_label() == Some(field))
    }

    pub fn has_field(self, field: &str) -> bool {
        self.child_by_field(field).is_some()
    }

    /// Text of the `operator` field, if any.
    pub fn operator_text(self) -> Option<&'t str> {
        self.child_by_field("operator").map(|c| c.text())
    }

    /// Position in the named pre-order, `None` for anonymous nodes.
    pub fn named_pos(self) -> Option<usize> {
        let pos = self.tree.data(self.id).named_pos;
        (pos != NOT_NAMED).then_some(pos as usize)
    }

    /// Named pre-order range covered by this node's named subtree
    /// (including the node itself).
    pub fn named_range(self) -> Range<usize> {
        let d = self.tree.data(self.id);
        assert!(d.named_pos != NOT_NAMED, "named_range on anonymous node");
        d.named_pos as usize..d.named_end as usize
    }

    /// Named nodes of the subtree rooted here, in pre-order.
    pub fn named_descendants(self) -> impl Iterator<Item = SyntaxNode<'t>> + 't {
        let tree = self.tree;
        let range = self.named_range();
        tree.named_order[range]
            .iter()
            .map(move |&id| SyntaxNode { tree, id })
    }

    /// True if `other` lies in the named subtree of `self` (or is `self`).
    pub fn contains(self, other: SyntaxNode<'_>) -> bool {
        match other.named_pos() {
            Some(pos) => self.named_range().contains(&pos),
            None => false,
        }
    }

    fn with(self, id: NodeId) -> SyntaxNode<'t> {
        SyntaxNode {
            tree: self.tree,
            id,
        }
    }
}

/// Pre-order traversal of all named nodes; the first element is the root.
pub fn iter_named_nodes(tree: &SyntaxTree) -> impl ExactSizeIterator<Item = SyntaxNode<'_>> + '_ {
    tree.named_nodes()
}

/// Number of named nodes on the longest downward path from `node`
/// (a leaf has height 1).
pub fn subtree_height(node: SyntaxNode<'_>) -> usize {
    let tree = node.tree();
    let range = node.named_range();
    let base = range.start;
    let mut height = vec![0usize; range.len()];
    for pos in range.clone().rev() {
        let n = tree.named_at(pos);
        let best = n
            .named_children()
            .map(|c| height[c.named_pos().unwrap() - base])
            .max()
            .unwrap_or(0);
        height[pos - base] = best + 1;
    }
    height[0]
}

/// Incremental construction of trees, used by the parser adapter and by
/// tests that need hand-made trees.
#[derive(Debug)]
pub struct TreeBuilder {
    nodes: Vec<NodeData>,
    open: Vec<NodeId>,
}

impl Default for TreeBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl TreeBuilder {
    pub fn new() -> Self {
        TreeBuilder {
            nodes: Vec::new(),
            open: Vec::new(),
        }
    }

    /// Starts a node as the last child of the innermost open node.
    pub fn open(
        &mut self,
        kind: impl Into<Cow<'static, str>>,
        field: Option<Cow<'static, str>>,
        named: bool,
        span: Range<usize>,
    ) -> NodeId {
        let id = NodeId(u32::try_from(self.nodes.len()).expect("tree too large"));
        let parent = self.open.last().copied();
        if parent.is_none() {
            assert!(self.nodes.is_empty(), "tree already has a root");
        }
        self.nodes.push(NodeData {
            kind: kind.into(),
            field,
            named,
            span,
            parent,
            children: Vec::new(),
            named_children: Vec::new(),
            named_parent: None,
            named_pos: NOT_NAMED,
            named_end: NOT_NAMED,
        });
        if let Some(p) = parent {
            self.nodes[p.index()].children.push(id);
        }
        self.open.push(id);
        id
    }

    pub fn close(&mut self) {
        self.open.pop().expect("close without open");
    }

    /// Adds a childless node.
    pub fn leaf(
        &mut self,
        kind: impl Into<Cow<'static, str>>,
        field: Option<Cow<'static, str>>,
        named: bool,
        span: Range<usize>,
    ) -> NodeId {
        let id = self.open(kind, field, named, span);
        self.close();
        id
    }

    /// Finalizes the tree. The root must be named.
    pub fn finish(mut self, source: SourceFunction, parse_error: bool) -> SyntaxTree {
        assert!(self.open.is_empty(), "unclosed nodes");
        assert!(!self.nodes.is_empty(), "empty tree");
        assert!(self.nodes[0].named, "root must be a named node");

        // Named view: re-parent named nodes to the nearest named ancestor.
        let mut named_order = Vec::new();
        for i in 0..self.nodes.len() {
            let id = NodeId(i as u32);
            let mut anc = self.nodes[i].parent;
            while let Some(a) = anc {
                if self.nodes[a.index()].named {
                    break;
                }
                anc = self.nodes[a.index()].parent;
            }
            if self.nodes[i].named {
                self.nodes[i].named_parent = anc;
                self.nodes[i].named_pos = named_order.len() as u32;
                named_order.push(id);
                if let Some(a) = anc {
                    self.nodes[a.index()].named_children.push(id);
                }
            } else {
                self.nodes[i].named_parent = anc;
            }
        }
        for pos in (0..named_order.len()).rev() {
            let id = named_order[pos];
            let end = self.nodes[id.index()]
                .named_children
                .last()
                .map(|c| self.nodes[c.index()].named_end)
                .unwrap_or(pos as u32 + 1);
            self.nodes[id.index()].named_end = end;
        }
        SyntaxTree {
            nodes: self.nodes,
            named_order,
            source,
            parse_error,
            dialect: None,
        }
    }
}

thread_local! {
    static PARSERS: RefCell<Option<(tree_sitter::Parser, tree_sitter::Parser)>> = const { RefCell::new(None) };
}

fn language(dialect: Dialect) -> tree_sitter::Language {
    match dialect {
        Dialect::C => tree_sitter_c::LANGUAGE.into(),
        Dialect::Cpp => tree_sitter_cpp::LANGUAGE.into(),
    }
}

fn ts_parse(code: &str, dialect: Dialect) -> Option<tree_sitter::Tree> {
    PARSERS.with(|cell| {
        let mut slot = cell.borrow_mut();
        if slot.is_none() {
            let mut c = tree_sitter::Parser::new();
            c.set_language(&language(Dialect::C)).ok()?;
            let mut cpp = tree_sitter::Parser::new();
            cpp.set_language(&language(Dialect::Cpp)).ok()?;
            *slot = Some((c, cpp));
        }
        let (c, cpp) = slot.as_mut().unwrap();
        match dialect {
            Dialect::C => c.parse(code, None),
            Dialect::Cpp => cpp.parse(code, None),
        }
    })
}

/// Kind and field names of a grammar with `'static` lifetime, so trees do
/// not allocate per node.
struct Symbols {
    kinds: Vec<&'static str>,
    fields: Vec<Option<&'static str>>,
}

fn symbols(dialect: Dialect) -> &'static Symbols {
    static C: OnceLock<Symbols> = OnceLock::new();
    static CPP: OnceLock<Symbols> = OnceLock::new();
    let cell = match dialect {
        Dialect::C => &C,
        Dialect::Cpp => &CPP,
    };
    cell.get_or_init(|| {
        let lang = language(dialect);
        let leak = |s: &str| -> &'static str { Box::leak(s.to_string().into_boxed_str()) };
        let kinds = (0..lang.node_kind_count() as u16)
            .map(|id| leak(lang.node_kind_for_id(id).unwrap_or("")))
            .collect();
        let fields = (0..=lang.field_count() as u16)
            .map(|id| lang.field_name_for_id(id).map(leak))
            .collect();
        Symbols { kinds, fields }
    })
}

fn error_node_count(tree: &tree_sitter::Tree) -> usize {
    if !tree.root_node().has_error() {
        return 0;
    }
    let mut count = 0;
    let mut cursor = tree.walk();
    'outer: loop {
        let n = cursor.node();
        if n.is_error() || n.is_missing() {
            count += 1;
        }
        if n.has_error() && cursor.goto_first_child() {
            continue;
        }
        loop {
            if cursor.goto_next_sibling() {
                continue 'outer;
            }
            if !cursor.goto_parent() {
                break 'outer;
            }
        }
    }
    count
}

fn skipped(node: tree_sitter::Node<'_>) -> bool {
    node.is_missing() || (node.is_extra() && node.kind() == "comment")
}

/// Parses one function definition.
///
/// Malformed code never fails: the grammar's error recovery produces a
/// best-effort tree and `parse_error` is set. Comment nodes and zero-width
/// `MISSING` placeholders are dropped. When the translation unit holds a
/// single named item (normally the function definition) that item becomes
/// the root.
pub fn parse_function(source: SourceFunction) -> Result<SyntaxTree> {
    if source.code.trim().is_empty() {
        return Err(Error::EmptySource);
    }
    let failure = || Error::ParserFailure {
        id: source.id.clone(),
    };
    let (ts_tree, dialect) = match source.dialect {
        Some(d) => (ts_parse(&source.code, d).ok_or_else(failure)?, d),
        None => {
            let cpp = ts_parse(&source.code, Dialect::Cpp).ok_or_else(failure)?;
            let cpp_errors = error_node_count(&cpp);
            if cpp_errors == 0 {
                (cpp, Dialect::Cpp)
            } else {
                let c = ts_parse(&source.code, Dialect::C).ok_or_else(failure)?;
                if error_node_count(&c) < cpp_errors {
                    (c, Dialect::C)
                } else {
                    (cpp, Dialect::Cpp)
                }
            }
        }
    };
    let parse_error = ts_tree.root_node().has_error();

    let unit = ts_tree.root_node();
    let mut cursor = unit.walk();
    let items: Vec<_> = unit
        .named_children(&mut cursor)
        .filter(|n| !skipped(*n))
        .collect();
    let root = if items.len() == 1 { items[0] } else { unit };

    let syms = symbols(dialect);
    let mut builder = TreeBuilder::new();
    let mut cursor = root.walk();
    // Mirrors the cursor depth: whether each ancestor was kept.
    let mut kept: Vec<bool> = Vec::new();
    'outer: loop {
        let node = cursor.node();
        let keep = !skipped(node);
        if keep {
            let field = cursor
                .field_id()
                .and_then(|f| syms.fields.get(f.get() as usize).copied().flatten())
                .map(Cow::Borrowed);
            let kind: Cow<'static, str> = if node.is_error() {
                Cow::Borrowed("ERROR")
            } else {
                match syms.kinds.get(node.kind_id() as usize) {
                    Some(k) => Cow::Borrowed(*k),
                    None => Cow::Owned(node.kind().to_string()),
                }
            };
            builder.open(kind, field, node.is_named(), node.byte_range());
            if cursor.goto_first_child() {
                kept.push(true);
                continue;
            }
            builder.close();
        }
        loop {
            if cursor.goto_next_sibling() {
                continue 'outer;
            }
            if !cursor.goto_parent() {
                break 'outer;
            }
            if kept.pop() == Some(true) {
                builder.close();
            }
        }
    }
    let mut tree = builder.finish(source, parse_error);
    tree.dialect = Some(dialect);
    Ok(tree)
}
