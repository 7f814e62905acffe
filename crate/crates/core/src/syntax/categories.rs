//! Abstract node categories (`loop_stmt`, `cond_stmt`, ...) and their
//! concrete grammar kinds.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{language, Dialect, SyntaxNode};
use crate::error::{Error, Result};

/// One concrete kind admitted by a category, optionally narrowed by the
/// node's operator token or by the presence of a field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindRule {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operators: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requires_field: Option<String>,
}

impl KindRule {
    pub fn kind(kind: &str) -> Self {
        KindRule {
            kind: kind.to_string(),
            operators: None,
            requires_field: None,
        }
    }

    pub fn with_operator(kind: &str, ops: &[&str]) -> Self {
        KindRule {
            operators: Some(ops.iter().map(|s| s.to_string()).collect()),
            ..KindRule::kind(kind)
        }
    }

    pub fn with_field(kind: &str, field: &str) -> Self {
        KindRule {
            requires_field: Some(field.to_string()),
            ..KindRule::kind(kind)
        }
    }

    pub fn matches(&self, node: SyntaxNode<'_>) -> bool {
        if node.kind() != self.kind {
            return false;
        }
        if let Some(ops) = &self.operators {
            match node.operator_text() {
                Some(op) if ops.iter().any(|o| o == op) => {}
                _ => return false,
            }
        }
        if let Some(field) = &self.requires_field {
            if !node.has_field(field) {
                return false;
            }
        }
        true
    }
}

/// Mapping from abstract category names to concrete kind rules, plus the
/// set of concrete kinds a query may name directly.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeCategoryTable {
    categories: BTreeMap<String, Vec<KindRule>>,
    #[serde(skip)]
    concrete_kinds: BTreeSet<String>,
}

const LOOPS: [&str; 4] = [
    "for_statement",
    "while_statement",
    "do_statement",
    "for_range_loop",
];

impl Default for NodeCategoryTable {
    fn default() -> Self {
        Self::c_cpp()
    }
}

impl NodeCategoryTable {
    /// Empty table that accepts the given concrete kinds in queries.
    pub fn new<I, S>(concrete_kinds: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        NodeCategoryTable {
            categories: BTreeMap::new(),
            concrete_kinds: concrete_kinds.into_iter().map(Into::into).collect(),
        }
    }

    /// The default table for the tree-sitter C and C++ grammars.
    pub fn c_cpp() -> Self {
        let mut kinds = BTreeSet::new();
        for dialect in [Dialect::C, Dialect::Cpp] {
            let lang = language(dialect);
            for id in 0..lang.node_kind_count() as u16 {
                if lang.node_kind_is_named(id) && lang.node_kind_is_visible(id) {
                    if let Some(k) = lang.node_kind_for_id(id) {
                        kinds.insert(k.to_string());
                    }
                }
            }
        }
        kinds.insert("ERROR".to_string());
        let mut t = NodeCategoryTable::new(kinds);

        let simple = |k: &[&str]| k.iter().map(|k| KindRule::kind(k)).collect::<Vec<_>>();
        let mut cond = simple(&["if_statement", "conditional_expression"]);
        // `default:` labels carry no `value` and are not decision points.
        cond.push(KindRule::with_field("case_statement", "value"));
        cond.extend(simple(&LOOPS));
        let mut ctrl = cond.clone();
        ctrl.push(KindRule::kind("switch_statement"));

        t.insert("loop_stmt", simple(&LOOPS));
        t.insert("cond_stmt", cond);
        t.insert("ctrl_stmt", ctrl);
        t.insert("if_stmt", simple(&["if_statement"]));
        t.insert("goto_stmt", simple(&["goto_statement"]));
        t.insert("expr_stmt", simple(&["expression_statement"]));
        t.insert("call_expr", simple(&["call_expression"]));
        t.insert("binary_expr", simple(&["binary_expression"]));
        t.insert(
            "unary_expr",
            simple(&["unary_expression", "update_expression"]),
        );
        t.insert(
            "pointer_expr",
            vec![KindRule::with_operator("pointer_expression", &["*"])],
        );
        t.insert("subscript_expr", simple(&["subscript_expression"]));
        t.insert(
            "field_expr",
            vec![KindRule::with_operator("field_expression", &["->"])],
        );
        t.insert("cast_expr", simple(&["cast_expression"]));
        t.insert("new_expr", simple(&["new_expression"]));
        t.insert("return_stmt", simple(&["return_statement"]));
        t.insert("declaration", simple(&["declaration"]));
        t.insert("init_declarator", simple(&["init_declarator"]));
        t.insert("function_declarator", simple(&["function_declarator"]));
        t.insert(
            "parameter_declaration",
            simple(&[
                "parameter_declaration",
                "optional_parameter_declaration",
                "variadic_parameter_declaration",
            ]),
        );
        t.insert("number_literal", simple(&["number_literal"]));
        t.insert("identifier", simple(&["identifier"]));
        t.insert(
            "literal",
            simple(&[
                "number_literal",
                "char_literal",
                "string_literal",
                "raw_string_literal",
                "user_defined_literal",
                "true",
                "false",
                "null",
            ]),
        );
        // Operator tokens are anonymous; the matcher never visits them, the
        // entry documents which tokens map functions inspect.
        t.insert(
            "operator",
            simple(&[
                "&&", "||", "+", "-", "*", "/", "%", "<<", ">>", "&", "|", "^", "==", "!=", "<",
                "<=", ">", ">=",
            ]),
        );
        t
    }

    pub fn insert(&mut self, category: &str, rules: Vec<KindRule>) {
        self.categories.insert(category.to_string(), rules);
    }

    pub fn add_concrete_kind(&mut self, kind: &str) {
        self.concrete_kinds.insert(kind.to_string());
    }

    pub fn rules(&self, category: &str) -> Option<&[KindRule]> {
        self.categories.get(category).map(Vec::as_slice)
    }

    pub fn has_category(&self, category: &str) -> bool {
        self.categories.contains_key(category)
    }

    pub fn is_concrete_kind(&self, kind: &str) -> bool {
        self.concrete_kinds.contains(kind)
    }

    pub fn categories(&self) -> impl Iterator<Item = (&str, &[KindRule])> {
        self.categories
            .iter()
            .map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    fn unknown(&self, name: &str) -> Error {
        Error::UnknownCategory {
            name: name.to_string(),
            known: self
                .categories
                .keys()
                .map(String::as_str)
                .collect::<Vec<_>>()
                .join(", "),
        }
    }

    pub fn matches(&self, node: SyntaxNode<'_>, category: &str) -> Result<bool> {
        let rules = self.rules(category).ok_or_else(|| self.unknown(category))?;
        Ok(rules.iter().any(|r| r.matches(node)))
    }
}

/// True iff `node` belongs to `category` under `table`.
pub fn category_matches(
    node: SyntaxNode<'_>,
    category: &str,
    table: &NodeCategoryTable,
) -> Result<bool> {
    table.matches(node, category)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_function, SourceFunction, SyntaxTree};

    fn parse(code: &str) -> SyntaxTree {
        parse_function(SourceFunction::new("t", code)).unwrap()
    }

    fn first<'t>(t: &'t SyntaxTree, kind: &str) -> SyntaxNode<'t> {
        t.named_nodes().find(|n| n.kind() == kind).unwrap()
    }

    #[test]
    fn direct_aliases() {
        let table = NodeCategoryTable::default();
        let t = parse("void f(){ l: goto l; while (x) {} }");
        assert!(category_matches(first(&t, "goto_statement"), "goto_stmt", &table).unwrap());
        assert!(category_matches(first(&t, "while_statement"), "cond_stmt", &table).unwrap());
        assert!(category_matches(first(&t, "while_statement"), "ctrl_stmt", &table).unwrap());
        assert!(!category_matches(first(&t, "identifier"), "loop_stmt", &table).unwrap());
    }

    #[test]
    fn unknown_category_lists_known_ones() {
        let table = NodeCategoryTable::default();
        let t = parse("void f(){}");
        let err = category_matches(t.root(), "nope_stmt", &table).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("nope_stmt") && msg.contains("loop_stmt"));
    }

    #[test]
    fn operator_narrowed_categories() {
        let table = NodeCategoryTable::default();
        let t = parse("void f(S *s, S v, int x){ *s; &x; s->a; v.a; }");
        let ptrs: Vec<bool> = t
            .named_nodes()
            .filter(|n| n.kind() == "pointer_expression")
            .map(|n| table.matches(n, "pointer_expr").unwrap())
            .collect();
        assert_eq!(ptrs, [true, false]);
        let fields: Vec<bool> = t
            .named_nodes()
            .filter(|n| n.kind() == "field_expression")
            .map(|n| table.matches(n, "field_expr").unwrap())
            .collect();
        assert_eq!(fields, [true, false]);
    }

    #[test]
    fn default_label_is_not_a_condition() {
        let table = NodeCategoryTable::default();
        let t = parse("void f(int x){ switch (x) { case 1: break; default: break; } }");
        let cases: Vec<bool> = t
            .named_nodes()
            .filter(|n| n.kind() == "case_statement")
            .map(|n| table.matches(n, "cond_stmt").unwrap())
            .collect();
        assert_eq!(cases, [true, false]);
    }

    #[test]
    fn every_rule_kind_is_a_grammar_kind() {
        let table = NodeCategoryTable::default();
        for (cat, rules) in table.categories() {
            assert!(!rules.is_empty(), "{cat} is empty");
            if cat == "operator" {
                continue;
            }
            for r in rules {
                assert!(table.is_concrete_kind(&r.kind), "{cat}: {} unknown", r.kind);
            }
        }
    }

    #[test]
    fn matches_agrees_with_rules_for_every_pair() {
        let table = NodeCategoryTable::default();
        let t = parse(
            "int f(int *p, int n){ for (int i = 0; i < n; i++) { if (p[i] && n) continue; } \
             do { n--; } while (n > 0); switch (n) { case 2: return n ? 1 : 0; } goto end; \
             end: return (int)*p; }",
        );
        for n in t.named_nodes() {
            for (cat, rules) in table.categories() {
                let expected = rules.iter().any(|r| r.kind == n.kind() && r.matches(n));
                assert_eq!(table.matches(n, cat).unwrap(), expected);
            }
        }
    }
}
