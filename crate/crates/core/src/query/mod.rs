//! S-expression tree queries.
//!
//! ```text
//! (a)                 node of kind or category `a`
//! (_)                 any named node
//! (!a)                any node not of kind `a`
//! ((a) | (b))         alternative
//! (a (b) (c))         `a` with children `b` and `c`, in order (extra children allowed)
//! (a !f)              `a` with no child in field `f`
//! (a f: (b))          child `b` must occupy field `f`
//! (a (b)* (c)+)       sibling quantifiers: zero-or-more / one-or-more children
//! (a (b)^* (c)^+)     descendant quantifiers: downward chains of `b` / `c`
//! (a ((b)^* (c)))     path group: chain of `b` nodes followed by one `c`
//! (a {type: 'ptr'})   attribute predicate, answered by an [`AttributeOracle`]
//! (a) @x              capture
//! ```
//!
//! A child item with a descendant quantifier or a path group describes a
//! downward chain whose first node is a child of the enclosing node. Each
//! child item consumes at most one child (sibling quantifiers consume
//! several); items consume children in order. Captures collect every node
//! bound in any successful embedding rooted at the match.

mod brute;
mod matcher;
mod parser;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::syntax::{NodeCategoryTable, NodeId, SyntaxNode, SyntaxTree};

pub use brute::brute_force_match;
pub use matcher::Query;
pub use parser::parse_query;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KindMatcher {
    Wildcard,
    Name(String),
    Not(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Attribute {
    pub key: String,
    pub value: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantifier {
    One,
    /// `*`
    Star,
    /// `+`
    Plus,
    /// `^*`
    DescendStar,
    /// `^+`
    DescendPlus,
}

impl Quantifier {
    pub fn is_sibling(self) -> bool {
        matches!(self, Quantifier::Star | Quantifier::Plus)
    }

    pub fn is_descendant(self) -> bool {
        matches!(self, Quantifier::DescendStar | Quantifier::DescendPlus)
    }

    fn suffix(self) -> &'static str {
        match self {
            Quantifier::One => "",
            Quantifier::Star => "*",
            Quantifier::Plus => "+",
            Quantifier::DescendStar => "^*",
            Quantifier::DescendPlus => "^+",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodePattern {
    pub kind: KindMatcher,
    pub attributes: Vec<Attribute>,
    pub negated_fields: Vec<String>,
    pub children: Vec<Item>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pattern {
    Node(NodePattern),
    Alternative(Vec<Item>),
    Group(Vec<Item>),
}

/// A pattern in a position: optional field constraint, quantifier, capture.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Item {
    pub field: Option<String>,
    pub pattern: Pattern,
    pub quantifier: Quantifier,
    pub capture: Option<String>,
}

impl Item {
    pub fn new(pattern: Pattern) -> Self {
        Item {
            field: None,
            pattern,
            quantifier: Quantifier::One,
            capture: None,
        }
    }

    /// True if the item can be satisfied by an empty chain.
    pub fn nullable(&self) -> bool {
        match self.quantifier {
            Quantifier::Star | Quantifier::DescendStar => true,
            Quantifier::Plus => false,
            Quantifier::One | Quantifier::DescendPlus => self.pattern.nullable(),
        }
    }
}

impl Pattern {
    pub fn nullable(&self) -> bool {
        match self {
            Pattern::Node(_) => false,
            Pattern::Alternative(branches) => branches.iter().any(Item::nullable),
            Pattern::Group(items) => items.iter().all(Item::nullable),
        }
    }
}

/// Parsed query.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QueryPattern {
    pub root: Item,
}

impl QueryPattern {
    /// Capture names in order of appearance.
    pub fn capture_names(&self) -> Vec<String> {
        fn walk(item: &Item, out: &mut Vec<String>) {
            if let Some(c) = &item.capture {
                out.push(c.clone());
            }
            match &item.pattern {
                Pattern::Node(n) => n.children.iter().for_each(|c| walk(c, out)),
                Pattern::Alternative(v) | Pattern::Group(v) => v.iter().for_each(|c| walk(c, out)),
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }
}

impl fmt::Display for QueryPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(field) = &self.field {
            write!(f, "{field}: ")?;
        }
        write!(f, "{}{}", self.pattern, self.quantifier.suffix())?;
        if let Some(c) = &self.capture {
            write!(f, " @{c}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Node(n) => {
                f.write_str("(")?;
                match &n.kind {
                    KindMatcher::Wildcard => f.write_str("_")?,
                    KindMatcher::Name(k) => f.write_str(k)?,
                    KindMatcher::Not(k) => write!(f, "!{k}")?,
                }
                if !n.attributes.is_empty() {
                    f.write_str(" {")?;
                    for (i, a) in n.attributes.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{}: '{}'", a.key, a.value)?;
                    }
                    f.write_str("}")?;
                }
                for nf in &n.negated_fields {
                    write!(f, " !{nf}")?;
                }
                for c in &n.children {
                    write!(f, " {c}")?;
                }
                f.write_str(")")
            }
            Pattern::Alternative(branches) => {
                f.write_str("(")?;
                for (i, b) in branches.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write!(f, "{b}")?;
                }
                f.write_str(")")
            }
            Pattern::Group(items) => {
                f.write_str("(")?;
                for (i, b) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    write!(f, "{b}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// One match: its root node and the nodes bound to each capture.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchResult {
    pub root: NodeId,
    pub captures: BTreeMap<String, Vec<NodeId>>,
}

impl MatchResult {
    pub fn capture(&self, name: &str) -> &[NodeId] {
        self.captures.get(name).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Answers attribute predicates such as `{type: 'pointer'}`.
pub trait AttributeOracle {
    fn holds(&self, node: SyntaxNode<'_>, key: &str, value: &str) -> bool;
}

/// Oracle for which no attribute ever holds.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoAttributes;

impl AttributeOracle for NoAttributes {
    fn holds(&self, _: SyntaxNode<'_>, _: &str, _: &str) -> bool {
        false
    }
}

/// Every match of `pattern` in `tree`, in pre-order of the match roots.
pub fn match_pattern(
    tree: &SyntaxTree,
    pattern: &QueryPattern,
    table: &NodeCategoryTable,
) -> Result<Vec<MatchResult>> {
    Ok(Query::new(pattern.clone(), table)?.matches(tree, &NoAttributes))
}
