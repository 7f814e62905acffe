//! Metric catalog and evaluation.
//!
//! A metric is a filter query, a map applied to every match, and a reduce
//! over the mapped values. Auxiliary metrics are only reachable through
//! map functions and never appear in feature vectors.

mod pointer;

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::Range;
use std::rc::Rc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::query::{parse_query, MatchResult, Query, QueryPattern};
use crate::syntax::{NodeCategoryTable, SyntaxNode, SyntaxTree};

pub use pointer::{pointer_attribute_oracle, PointerOracle};

/// Exported metric ids in feature order.
pub const METRIC_IDS: [&str; 23] = [
    "S1", "S2", "S3", "S4", "S5", "C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9", "C10",
    "C11", "C12", "M1", "M2", "M3", "T1", "T2", "T3",
];

pub const AUXILIARY_IDS: [&str; 4] = ["C1.1", "M1.1", "M1.2", "M3.1"];

pub const NUM_METRICS: usize = METRIC_IDS.len();

/// Index of an exported metric in feature order.
pub fn metric_index(id: &str) -> Option<usize> {
    METRIC_IDS.iter().position(|&m| m == id)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReduceKind {
    Sum,
    Max,
    Avg,
}

impl ReduceKind {
    /// Reduces mapped values; the empty set reduces to 0 for every kind.
    pub fn apply(self, values: impl IntoIterator<Item = f64>) -> f64 {
        let mut n = 0usize;
        let mut acc = 0.0f64;
        for v in values {
            acc = match self {
                ReduceKind::Sum | ReduceKind::Avg => acc + v,
                ReduceKind::Max if n == 0 => v,
                ReduceKind::Max => acc.max(v),
            };
            n += 1;
        }
        match self {
            ReduceKind::Avg if n > 0 => acc / n as f64,
            _ => acc,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    ConstantOne,
    /// 1 unless the captured literal's value is -1, 0 or 1.
    MagicNumber {
        capture: String,
    },
    /// 1 if the node's operator is `&&` or `||`.
    LogicalOperator,
    /// 1 + the auxiliary metric over the subtrees in the given fields.
    OnePlusAuxInFields {
        aux: String,
        fields: Vec<String>,
    },
    /// 1 if the captured name contains `needle`, ignoring case.
    NameContains {
        capture: String,
        needle: String,
    },
    /// Sum of the auxiliaries' mapped values for matches rooted at the node.
    AuxAtRoot {
        aux: Vec<String>,
    },
    /// 1 if the auxiliary metric over the subtree is positive.
    AuxPositive {
        aux: String,
    },
    /// 1 + number of proper ancestors in the category.
    NestingLevel {
        category: String,
    },
    /// 1 if some proper ancestor is in the category.
    HasAncestor {
        category: String,
    },
    /// Number of proper descendants in the category.
    DescendantCount {
        category: String,
    },
    /// Number of nodes of the subtree (root included) in any category.
    SubtreeCount {
        categories: Vec<String>,
    },
    SubtreeHeight,
    CaptureCardinality {
        capture: String,
    },
}

impl MapKind {
    fn aux_refs(&self) -> Vec<&str> {
        match self {
            MapKind::OnePlusAuxInFields { aux, .. } | MapKind::AuxPositive { aux } => {
                vec![aux.as_str()]
            }
            MapKind::AuxAtRoot { aux } => aux.iter().map(String::as_str).collect(),
            _ => Vec::new(),
        }
    }

    fn categories(&self) -> Vec<&str> {
        match self {
            MapKind::NestingLevel { category }
            | MapKind::HasAncestor { category }
            | MapKind::DescendantCount { category } => vec![category.as_str()],
            MapKind::SubtreeCount { categories } => categories.iter().map(String::as_str).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MetricSpec {
    pub id: String,
    pub description: String,
    #[serde(rename = "query")]
    pub query_text: String,
    #[serde(skip)]
    pub filter: QueryPattern,
    pub map: MapKind,
    pub reduce: ReduceKind,
    pub exported: bool,
}

impl MetricSpec {
    pub fn new(
        id: &str,
        description: &str,
        query: &str,
        map: MapKind,
        reduce: ReduceKind,
        exported: bool,
    ) -> Result<Self> {
        Ok(MetricSpec {
            id: id.to_string(),
            description: description.to_string(),
            query_text: query.to_string(),
            filter: parse_query(query)?,
            map,
            reduce,
            exported,
        })
    }
}

/// Immutable set of metric definitions: the exported metrics in feature
/// order followed by auxiliaries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MetricCatalog {
    specs: Vec<MetricSpec>,
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<5} {:<42} {}",
            self.id, self.description, self.query_text
        )
    }
}

fn one() -> MapKind {
    MapKind::ConstantOne
}

impl MetricCatalog {
    /// Validates ids and auxiliary references.
    pub fn new(specs: Vec<MetricSpec>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for s in &specs {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate metric id {}",
                    s.id
                )));
            }
        }
        for s in &specs {
            for r in s.map.aux_refs() {
                match specs.iter().find(|t| t.id == r) {
                    None => {
                        return Err(Error::InvalidArgument(format!(
                            "{} references unknown auxiliary {r}",
                            s.id
                        )))
                    }
                    Some(t) if t.exported => {
                        return Err(Error::InvalidArgument(format!(
                            "{} references exported metric {r} as an auxiliary",
                            s.id
                        )))
                    }
                    _ => {}
                }
            }
        }
        let catalog = MetricCatalog { specs };
        // Reject reference cycles.
        fn visit<'a>(c: &'a MetricCatalog, id: &'a str, stack: &mut Vec<&'a str>) -> Result<()> {
            if stack.contains(&id) {
                return Err(Error::InvalidArgument(format!(
                    "auxiliary cycle through {id}"
                )));
            }
            stack.push(id);
            for r in c.get(id).unwrap().map.aux_refs() {
                visit(c, r, stack)?;
            }
            stack.pop();
            Ok(())
        }
        for s in &catalog.specs {
            visit(&catalog, &s.id, &mut Vec::new())?;
        }
        Ok(catalog)
    }

    /// The 23 exported metrics plus the auxiliaries C1.1, M1.1, M1.2, M3.1.
    pub fn default_catalog() -> Self {
        use MapKind::*;
        use ReduceKind::*;
        let cat = |c: &str| c.to_string();
        let rows: Vec<(&str, &str, &str, MapKind, ReduceKind, bool)> = vec![
            ("S1", "magic numbers", "(number_literal) @num",
                MagicNumber { capture: cat("num") }, Sum, true),
            ("S2", "goto statements", "(goto_stmt)", one(), Sum, true),
            ("S3", "function pointers",
                "((declaration (init_declarator (function_declarator))) | (parameter_declaration (function_declarator)))",
                one(), Sum, true),
            ("S4", "calls with unused return value", "(expr_stmt (call_expr))", one(), Sum, true),
            ("S5", "if without else", "(if_stmt !alternative)", one(), Sum, true),
            ("C1", "cyclomatic complexity", "(cond_stmt (_))",
                OnePlusAuxInFields { aux: cat("C1.1"), fields: vec![cat("condition"), cat("value")] },
                Sum, true),
            ("C1.1", "logical operators", "(binary_expr)", LogicalOperator, Sum, false),
            ("C2", "loops", "(loop_stmt)", one(), Sum, true),
            ("C3", "nested loops", "(loop_stmt ((!loop_stmt)^* (loop_stmt)))", one(), Sum, true),
            ("C4", "max loop nesting level", "(loop_stmt)",
                NestingLevel { category: cat("loop_stmt") }, Max, true),
            ("C5", "parameters", "(parameter_declaration)", one(), Sum, true),
            ("C6", "nested control structures", "(ctrl_stmt)",
                HasAncestor { category: cat("ctrl_stmt") }, Sum, true),
            ("C7", "max control nesting level", "(ctrl_stmt)",
                NestingLevel { category: cat("ctrl_stmt") }, Max, true),
            ("C8", "max control structures inside a control structure", "(ctrl_stmt)",
                DescendantCount { category: cat("ctrl_stmt") }, Max, true),
            ("C9", "return statements", "(return_stmt)", one(), Sum, true),
            ("C10", "casts", "(cast_expr)", one(), Sum, true),
            ("C11", "local variable declarations", "(declaration)", one(), Sum, true),
            ("C12", "max operands", "(binary_expr)",
                SubtreeCount { categories: vec![cat("identifier"), cat("literal")] }, Max, true),
            ("M1", "heap allocations", "((new_expr) | (call_expr function: (identifier)))",
                AuxAtRoot { aux: vec![cat("M1.1"), cat("M1.2")] }, Sum, true),
            ("M1.1", "new allocations", "(new_expr)", one(), Sum, false),
            ("M1.2", "allocation calls", "(call_expr function: (identifier) @name)",
                NameContains { capture: cat("name"), needle: cat("alloc") }, Sum, false),
            ("M2", "pointer dereferences", "((pointer_expr) | (subscript_expr) | (field_expr))",
                one(), Sum, true),
            ("M3", "pointer arithmetic", "((binary_expr) | (unary_expr))",
                AuxPositive { aux: cat("M3.1") }, Sum, true),
            ("M3.1", "pointer-typed expressions", "({type: 'pointer'})", one(), Sum, false),
            ("T1", "syntax tree nodes", "(_)", one(), Sum, true),
            ("T2", "syntax tree height", "(_ (_)^*)", SubtreeHeight, Max, true),
            ("T3", "average children per inner node", "(_ (_)+ @children)",
                CaptureCardinality { capture: cat("children") }, Avg, true),
        ];
        let mut specs: Vec<MetricSpec> = rows
            .into_iter()
            .map(|(id, d, q, m, r, e)| MetricSpec::new(id, d, q, m, r, e).expect("static query"))
            .collect();
        // Exported metrics first, in feature order.
        specs.sort_by_key(|s| metric_index(&s.id).unwrap_or(NUM_METRICS));
        MetricCatalog::new(specs).expect("default catalog is valid")
    }

    pub fn specs(&self) -> &[MetricSpec] {
        &self.specs
    }

    pub fn exported(&self) -> impl Iterator<Item = &MetricSpec> {
        self.specs.iter().filter(|s| s.exported)
    }

    pub fn get(&self, id: &str) -> Option<&MetricSpec> {
        self.specs.iter().find(|s| s.id == id)
    }

    /// Human-readable JSON manifest.
    pub fn manifest_json(&self) -> String {
        serde_json::to_string_pretty(&self.specs).expect("catalog serializes")
    }

    /// SHA-256 of the manifest, hex encoded.
    pub fn manifest_hash(&self) -> String {
        hex::encode(Sha256::digest(self.manifest_json().as_bytes()))
    }
}

impl Default for MetricCatalog {
    fn default() -> Self {
        Self::default_catalog()
    }
}

/// Numeric value of a C/C++ integer or floating literal, if it can be read.
pub fn literal_value(text: &str) -> Option<f64> {
    let text = text.trim();
    if let Some(rest) = text.strip_prefix('-') {
        return literal_value(rest).map(|v| -v);
    }
    let t: String = text
        .chars()
        .filter(|&c| c != '\'')
        .collect::<String>()
        .to_ascii_lowercase();
    let (radix, digits) = if let Some(h) = t.strip_prefix("0x") {
        (16, h)
    } else if let Some(b) = t.strip_prefix("0b") {
        (2, b)
    } else {
        (10, t.as_str())
    };
    if radix == 10 && digits.contains(['.', 'e']) {
        let body = digits.trim_end_matches(['f', 'l']);
        return body.parse::<f64>().ok();
    }
    if radix == 16 && digits.contains(['.', 'p']) {
        return None;
    }
    let body = digits.trim_end_matches(['u', 'l', 'z']);
    if body.is_empty() {
        return None;
    }
    let radix = if radix == 10 && body.len() > 1 && body.starts_with('0') {
        8
    } else {
        radix
    };
    u128::from_str_radix(body, radix).ok().map(|v| v as f64)
}

/// True if the literal is not one of -1, 0, 1 (unary minus applied).
/// Literals that cannot be read count as magic.
pub fn is_magic_number(node: SyntaxNode<'_>) -> bool {
    let Some(mut v) = literal_value(node.text()) else {
        return true;
    };
    if let Some(p) = node.named_parent() {
        if p.kind() == "unary_expression"
            && p.operator_text() == Some("-")
            && p.child_by_field("argument").map(|a| a.id()) == Some(node.id())
        {
            v = -v;
        }
    }
    !(v == -1.0 || v == 0.0 || v == 1.0)
}

/// Ordered feature values for one function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: [f64; NUM_METRICS],
    pub parse_error: bool,
}

impl FeatureVector {
    pub fn get(&self, id: &str) -> Option<f64> {
        metric_index(id).map(|i| self.values[i])
    }
}

/// A catalog compiled against a category table.
#[derive(Debug)]
pub struct Extractor {
    catalog: MetricCatalog,
    table: NodeCategoryTable,
    queries: Vec<Query>,
    exported: Vec<usize>,
}

impl Extractor {
    pub fn new(catalog: &MetricCatalog, table: &NodeCategoryTable) -> Result<Self> {
        let mut queries = Vec::new();
        for s in catalog.specs() {
            for c in s.map.categories() {
                if !table.has_category(c) {
                    return Err(Error::UnknownCategory {
                        name: c.to_string(),
                        known: table
                            .categories()
                            .map(|(k, _)| k)
                            .collect::<Vec<_>>()
                            .join(", "),
                    });
                }
            }
            queries.push(Query::new(s.filter.clone(), table)?);
        }
        let exported: Vec<usize> = catalog
            .specs()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.exported)
            .map(|(i, _)| i)
            .collect();
        Ok(Extractor {
            catalog: catalog.clone(),
            table: table.clone(),
            queries,
            exported,
        })
    }

    /// Default catalog and table.
    pub fn default_extractor() -> Self {
        Extractor::new(&MetricCatalog::default(), &NodeCategoryTable::default())
            .expect("default catalog compiles")
    }

    pub fn catalog(&self) -> &MetricCatalog {
        &self.catalog
    }

    /// Evaluates one metric (exported or auxiliary) over the whole tree.
    pub fn evaluate(&self, tree: &SyntaxTree, id: &str) -> Result<f64> {
        let idx = self
            .catalog
            .specs()
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown metric {id}")))?;
        let ev = TreeEval::new(self, tree);
        Ok(ev.metric_in(idx, 0..tree.named_count()))
    }

    /// Evaluates the exported metrics in catalog order.
    pub fn extract(&self, tree: &SyntaxTree) -> FeatureVector {
        let ev = TreeEval::new(self, tree);
        let mut values = [0.0; NUM_METRICS];
        for (slot, &idx) in values.iter_mut().zip(&self.exported) {
            *slot = ev.metric_in(idx, 0..tree.named_count());
        }
        FeatureVector {
            values,
            parse_error: tree.parse_error(),
        }
    }
}

type SharedValues = Rc<Vec<(usize, f64)>>;
type NodeSetKey = (u8, Vec<String>);

/// Per-tree evaluation state with lazily computed match and node tables.
struct TreeEval<'a> {
    ex: &'a Extractor,
    tree: &'a SyntaxTree,
    pointers: PointerOracle,
    values: RefCell<HashMap<usize, SharedValues>>,
    per_node: RefCell<HashMap<NodeSetKey, Rc<Vec<usize>>>>,
}

const ANCESTORS: u8 = 0;
const DESCENDANTS: u8 = 1;
const SUBTREE: u8 = 2;
const HEIGHT: u8 = 3;

impl<'a> TreeEval<'a> {
    fn new(ex: &'a Extractor, tree: &'a SyntaxTree) -> Self {
        TreeEval {
            ex,
            tree,
            pointers: PointerOracle::new(tree),
            values: RefCell::new(HashMap::new()),
            per_node: RefCell::new(HashMap::new()),
        }
    }

    fn spec_index(&self, id: &str) -> usize {
        self.ex
            .catalog
            .specs()
            .iter()
            .position(|s| s.id == id)
            .unwrap()
    }

    /// Mapped values of every match of a metric, keyed by root position.
    fn values(&self, idx: usize) -> Rc<Vec<(usize, f64)>> {
        if let Some(v) = self.values.borrow().get(&idx) {
            return v.clone();
        }
        let matches = self.ex.queries[idx].matches(self.tree, &self.pointers);
        let spec = &self.ex.catalog.specs()[idx];
        let v: Vec<(usize, f64)> = matches
            .iter()
            .map(|m| {
                let pos = self.tree.node(m.root).named_pos().unwrap();
                (pos, self.map(&spec.map, m, pos))
            })
            .collect();
        let v = Rc::new(v);
        self.values.borrow_mut().insert(idx, v.clone());
        v
    }

    fn in_range(values: &[(usize, f64)], range: Range<usize>) -> &[(usize, f64)] {
        let lo = values.partition_point(|&(p, _)| p < range.start);
        let hi = values.partition_point(|&(p, _)| p < range.end);
        &values[lo..hi]
    }

    /// Metric restricted to matches rooted in a pre-order range.
    fn metric_in(&self, idx: usize, range: Range<usize>) -> f64 {
        let values = self.values(idx);
        let reduce = self.ex.catalog.specs()[idx].reduce;
        reduce.apply(Self::in_range(&values, range).iter().map(|&(_, v)| v))
    }

    fn is_in(&self, pos: usize, categories: &[String]) -> bool {
        let node = self.tree.named_at(pos);
        categories
            .iter()
            .any(|c| self.ex.table.matches(node, c).unwrap_or(false))
    }

    fn table(&self, what: u8, categories: &[String]) -> Rc<Vec<usize>> {
        let key = (what, categories.to_vec());
        if let Some(v) = self.per_node.borrow().get(&key) {
            return v.clone();
        }
        let n = self.tree.named_count();
        let parent = |pos: usize| {
            self.tree
                .named_at(pos)
                .named_parent()
                .and_then(|p| p.named_pos())
        };
        let mut out = vec![0usize; n];
        match what {
            ANCESTORS => {
                for pos in 0..n {
                    if let Some(p) = parent(pos) {
                        out[pos] = out[p] + usize::from(self.is_in(p, categories));
                    }
                }
            }
            DESCENDANTS | SUBTREE => {
                for pos in (0..n).rev() {
                    let own = usize::from(self.is_in(pos, categories));
                    if what == SUBTREE {
                        out[pos] += own;
                    }
                    if let Some(p) = parent(pos) {
                        out[p] += if what == SUBTREE {
                            out[pos]
                        } else {
                            out[pos] + own
                        };
                    }
                }
            }
            _ => {
                for pos in (0..n).rev() {
                    out[pos] += 1;
                    if let Some(p) = parent(pos) {
                        out[p] = out[p].max(out[pos]);
                    }
                }
            }
        }
        let out = Rc::new(out);
        self.per_node.borrow_mut().insert(key, out.clone());
        out
    }

    fn captured(&self, m: &MatchResult, capture: &str) -> SyntaxNode<'a> {
        m.capture(capture)
            .first()
            .map(|&id| self.tree.node(id))
            .unwrap_or_else(|| self.tree.node(m.root))
    }

    fn map(&self, map: &MapKind, m: &MatchResult, pos: usize) -> f64 {
        let node = self.tree.named_at(pos);
        let ind = |b: bool| if b { 1.0 } else { 0.0 };
        match map {
            MapKind::ConstantOne => 1.0,
            MapKind::MagicNumber { capture } => ind(is_magic_number(self.captured(m, capture))),
            MapKind::LogicalOperator => ind(matches!(node.operator_text(), Some("&&" | "||"))),
            MapKind::OnePlusAuxInFields { aux, fields } => {
                let idx = self.spec_index(aux);
                1.0 + node
                    .children()
                    .filter(|c| c.is_named() && fields.iter().any(|f| c.field_label() == Some(f)))
                    .map(|c| self.metric_in(idx, c.named_range()))
                    .sum::<f64>()
            }
            MapKind::NameContains { capture, needle } => ind(self
                .captured(m, capture)
                .text()
                .to_lowercase()
                .contains(&needle.to_lowercase())),
            MapKind::AuxAtRoot { aux } => aux
                .iter()
                .map(|a| {
                    let values = self.values(self.spec_index(a));
                    Self::in_range(&values, pos..pos + 1)
                        .iter()
                        .map(|&(_, v)| v)
                        .sum::<f64>()
                })
                .sum(),
            MapKind::AuxPositive { aux } => {
                ind(self.metric_in(self.spec_index(aux), node.named_range()) > 0.0)
            }
            MapKind::NestingLevel { category } => {
                1.0 + self.table(ANCESTORS, std::slice::from_ref(category))[pos] as f64
            }
            MapKind::HasAncestor { category } => {
                ind(self.table(ANCESTORS, std::slice::from_ref(category))[pos] > 0)
            }
            MapKind::DescendantCount { category } => {
                self.table(DESCENDANTS, std::slice::from_ref(category))[pos] as f64
            }
            MapKind::SubtreeCount { categories } => self.table(SUBTREE, categories)[pos] as f64,
            MapKind::SubtreeHeight => self.table(HEIGHT, &[])[pos] as f64,
            MapKind::CaptureCardinality { capture } => m.capture(capture).len() as f64,
        }
    }
}

/// Builds the default catalog.
pub fn build_default_catalog() -> MetricCatalog {
    MetricCatalog::default_catalog()
}

/// Evaluates one metric of `catalog` on `tree`.
pub fn evaluate_metric(
    tree: &SyntaxTree,
    id: &str,
    catalog: &MetricCatalog,
    table: &NodeCategoryTable,
) -> Result<f64> {
    Extractor::new(catalog, table)?.evaluate(tree, id)
}

/// Evaluates all exported metrics of `catalog` on `tree`.
pub fn extract_features(
    tree: &SyntaxTree,
    catalog: &MetricCatalog,
    table: &NodeCategoryTable,
) -> Result<FeatureVector> {
    let ex = Extractor::new(catalog, table)?;
    if ex.exported.len() != NUM_METRICS {
        return Err(Error::DimensionMismatch {
            expected: NUM_METRICS,
            got: ex.exported.len(),
        });
    }
    Ok(ex.extract(tree))
}
