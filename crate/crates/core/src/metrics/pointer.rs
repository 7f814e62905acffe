//! Local pointer typing.
//!
//! A name is pointer-typed when its visible declaration (parameter or local)
//! reaches the identifier through a pointer or array declarator. Marked
//! expressions: identifiers bound to such names, address-of expressions,
//! and `+`, `-`, `++`, `--` or parentheses applied to a marked operand.
//! Nothing is inferred across functions; globals are unknown and unmarked.

use std::collections::HashMap;

use crate::query::AttributeOracle;
use crate::syntax::{SyntaxNode, SyntaxTree};

const SCOPES: [&str; 7] = [
    "function_definition",
    "compound_statement",
    "for_statement",
    "for_range_loop",
    "lambda_expression",
    "catch_clause",
    "condition_clause",
];

const DECLARATIONS: [&str; 4] = [
    "declaration",
    "parameter_declaration",
    "optional_parameter_declaration",
    "for_range_loop",
];

/// Marks heuristically pointer-typed expression nodes of one tree.
#[derive(Clone, Debug)]
pub struct PointerOracle {
    marked: Vec<bool>,
}

impl PointerOracle {
    #[allow(clippy::needless_range_loop)]
    pub fn new(tree: &SyntaxTree) -> Self {
        let n = tree.named_count();
        let mut marked = vec![false; n];

        // Scope-aware name resolution in pre-order.
        let mut scopes: Vec<(usize, HashMap<&str, bool>)> = vec![(n, HashMap::new())];
        for pos in 0..n {
            while scopes.len() > 1 && pos >= scopes.last().unwrap().0 {
                scopes.pop();
            }
            let node = tree.named_at(pos);
            let kind = node.kind();
            if SCOPES.contains(&kind) {
                scopes.push((node.named_range().end, HashMap::new()));
            }
            if DECLARATIONS.contains(&kind) {
                let scope = &mut scopes.last_mut().unwrap().1;
                for d in node
                    .children()
                    .filter(|c| c.field_label() == Some("declarator"))
                {
                    if let Some((name, is_ptr)) = declared_name(d) {
                        scope.insert(name, is_ptr);
                    }
                }
            }
            if kind == "identifier" {
                let name = node.text();
                let bound = scopes.iter().rev().find_map(|(_, s)| s.get(name).copied());
                marked[pos] = bound.unwrap_or(false);
            }
        }

        // Propagate upwards through arithmetic.
        for pos in (0..n).rev() {
            let node = tree.named_at(pos);
            let child_marked = |field: &str| {
                node.child_by_field(field)
                    .and_then(|c| c.named_pos())
                    .is_some_and(|p| marked[p])
            };
            let m = match node.kind() {
                "pointer_expression" => node.operator_text() == Some("&"),
                "binary_expression" => {
                    matches!(node.operator_text(), Some("+" | "-"))
                        && (child_marked("left") || child_marked("right"))
                }
                "update_expression" => child_marked("argument"),
                "parenthesized_expression" => node
                    .named_children()
                    .any(|c| marked[c.named_pos().unwrap()]),
                _ => false,
            };
            if m {
                marked[pos] = true;
            }
        }
        PointerOracle { marked }
    }

    pub fn is_pointer(&self, node: SyntaxNode<'_>) -> bool {
        node.named_pos().is_some_and(|p| self.marked[p])
    }

    /// Named pre-order positions of marked nodes.
    pub fn marked_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.marked
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }
}

impl AttributeOracle for PointerOracle {
    fn holds(&self, node: SyntaxNode<'_>, key: &str, value: &str) -> bool {
        key == "type" && value == "pointer" && self.is_pointer(node)
    }
}

/// Follows declarator wrappers down to the declared identifier.
fn declared_name(mut d: SyntaxNode<'_>) -> Option<(&str, bool)> {
    let mut is_ptr = false;
    loop {
        match d.kind() {
            "identifier" => return Some((d.text(), is_ptr)),
            "pointer_declarator" | "array_declarator" => is_ptr = true,
            "init_declarator"
            | "function_declarator"
            | "reference_declarator"
            | "attributed_declarator" => {}
            "parenthesized_declarator" => {
                d = d
                    .named_children()
                    .find(|c| c.kind().ends_with("declarator") || c.kind() == "identifier")?;
                continue;
            }
            _ => return None,
        }
        d = match d.child_by_field("declarator") {
            Some(next) => next,
            // reference_declarator carries its target without a field.
            None => d.named_children().last()?,
        };
    }
}

/// Convenience constructor.
pub fn pointer_attribute_oracle(tree: &SyntaxTree) -> PointerOracle {
    PointerOracle::new(tree)
}
