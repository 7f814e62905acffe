//! Exhaustive reference matcher. Enumerates every embedding explicitly, so
//! it is exponential and only meant for small trees in tests.

use std::collections::{BTreeMap, BTreeSet};

use super::{
    AttributeOracle, Item, KindMatcher, MatchResult, NodePattern, Pattern, Quantifier, QueryPattern,
};
use crate::error::{Error, Result};
use crate::syntax::{NodeCategoryTable, SyntaxNode, SyntaxTree};

type Binding = BTreeSet<(String, usize)>;
type Bindings = BTreeSet<Binding>;

struct Brute<'a, O: ?Sized> {
    table: &'a NodeCategoryTable,
    oracle: &'a O,
}

fn union(a: &Binding, b: &Binding) -> Binding {
    a.union(b).cloned().collect()
}

impl<O: AttributeOracle + ?Sized> Brute<'_, O> {
    fn name_matches(&self, name: &str, node: SyntaxNode<'_>) -> Result<bool> {
        if self.table.has_category(name) {
            self.table.matches(node, name)
        } else if self.table.is_concrete_kind(name) {
            Ok(node.kind() == name)
        } else {
            Err(Error::UnknownKind(name.to_string()))
        }
    }

    fn kind_matches(&self, k: &KindMatcher, node: SyntaxNode<'_>) -> Result<bool> {
        Ok(match k {
            KindMatcher::Wildcard => true,
            KindMatcher::Name(n) => self.name_matches(n, node)?,
            KindMatcher::Not(n) => !self.name_matches(n, node)?,
        })
    }

    /// Embeddings of a node pattern at `node`.
    fn node(&self, np: &NodePattern, node: SyntaxNode<'_>) -> Result<Bindings> {
        let mut out = Bindings::new();
        if !self.kind_matches(&np.kind, node)? {
            return Ok(out);
        }
        if !np
            .attributes
            .iter()
            .all(|a| self.oracle.holds(node, &a.key, &a.value))
        {
            return Ok(out);
        }
        if np.negated_fields.iter().any(|f| node.has_field(f)) {
            return Ok(out);
        }
        let children: Vec<SyntaxNode<'_>> = node.named_children().collect();
        self.assign(
            &np.children,
            0,
            &children,
            0,
            false,
            &Binding::new(),
            &mut out,
        )?;
        Ok(out)
    }

    /// Assigns items `i..` to children `j..`. `continuing` means item `i`
    /// is a sibling-quantified item that has already consumed a child.
    #[allow(clippy::too_many_arguments)]
    fn assign(
        &self,
        items: &[Item],
        i: usize,
        children: &[SyntaxNode<'_>],
        j: usize,
        continuing: bool,
        acc: &Binding,
        out: &mut Bindings,
    ) -> Result<()> {
        if i == items.len() {
            out.insert(acc.clone());
            return Ok(());
        }
        let item = &items[i];
        let sibling = item.quantifier.is_sibling();
        let may_stop = match item.quantifier {
            Quantifier::Star => true,
            Quantifier::Plus => continuing,
            _ => item.nullable(),
        };
        if may_stop {
            self.assign(items, i + 1, children, j, false, acc, out)?;
        }
        let base;
        let single = if sibling {
            base = Item {
                quantifier: Quantifier::One,
                ..item.clone()
            };
            &base
        } else {
            item
        };
        for c in j..children.len() {
            for (b, _) in self.chains(single, children[c], &[], &[])? {
                let next = union(acc, &b);
                if sibling {
                    self.assign(items, i, children, c + 1, true, &next, out)?;
                } else {
                    self.assign(items, i + 1, children, c + 1, false, &next, out)?;
                }
            }
        }
        Ok(())
    }

    /// Non-empty downward chains starting at `node` that match `item`,
    /// with the last node of each chain.
    fn chains(
        &self,
        item: &Item,
        node: SyntaxNode<'_>,
        fields: &[String],
        captures: &[String],
    ) -> Result<BTreeSet<(Binding, usize)>> {
        let mut fields = fields.to_vec();
        fields.extend(item.field.iter().cloned());
        let mut captures = captures.to_vec();
        captures.extend(item.capture.iter().cloned());

        let once = |node: SyntaxNode<'_>| -> Result<BTreeSet<(Binding, usize)>> {
            let mut out = BTreeSet::new();
            match &item.pattern {
                Pattern::Node(np) => {
                    if fields
                        .iter()
                        .all(|f| node.field_label() == Some(f.as_str()))
                    {
                        let pos = node.named_pos().unwrap();
                        for mut b in self.node(np, node)? {
                            for c in &captures {
                                b.insert((c.clone(), pos));
                            }
                            out.insert((b, pos));
                        }
                    }
                }
                Pattern::Alternative(branches) => {
                    for br in branches {
                        out.extend(self.chains(br, node, &fields, &captures)?);
                    }
                }
                Pattern::Group(items) => out.extend(self.sequence(items, node)?),
            }
            Ok(out)
        };

        if !item.quantifier.is_descendant() {
            return once(node);
        }
        // One or more repetitions, each starting below the previous one.
        let mut out = BTreeSet::new();
        let mut frontier: Vec<(Binding, SyntaxNode<'_>)> = vec![(Binding::new(), node)];
        let tree = node.tree();
        let mut first = true;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (acc, start) in frontier {
                let starts: Vec<SyntaxNode<'_>> = if first {
                    vec![start]
                } else {
                    start.named_children().collect()
                };
                for s in starts {
                    for (b, last) in once(s)? {
                        let merged = union(&acc, &b);
                        if out.insert((merged.clone(), last)) {
                            next.push((merged, tree.named_at(last)));
                        }
                    }
                }
            }
            frontier = next;
            first = false;
        }
        Ok(out)
    }

    /// Non-empty chains matching the concatenation of `items`.
    fn sequence(&self, items: &[Item], node: SyntaxNode<'_>) -> Result<BTreeSet<(Binding, usize)>> {
        let mut out = BTreeSet::new();
        let Some((head, rest)) = items.split_first() else {
            return Ok(out);
        };
        if head.nullable() {
            out.extend(self.sequence(rest, node)?);
        }
        let rest_nullable = rest.iter().all(Item::nullable);
        let tree = node.tree();
        for (b, last) in self.chains(head, node, &[], &[])? {
            if rest_nullable {
                out.insert((b.clone(), last));
            }
            for child in tree.named_at(last).named_children() {
                for (b2, l2) in self.sequence(rest, child)? {
                    out.insert((union(&b, &b2), l2));
                }
            }
        }
        Ok(out)
    }
}

/// Reference implementation of query matching by exhaustive enumeration.
pub fn brute_force_match<O: AttributeOracle + ?Sized>(
    tree: &SyntaxTree,
    pattern: &QueryPattern,
    table: &NodeCategoryTable,
    oracle: &O,
) -> Result<Vec<MatchResult>> {
    let brute = Brute { table, oracle };
    let names = pattern.capture_names();
    let mut out = Vec::new();
    for node in tree.named_nodes() {
        let embeddings = brute.chains(&pattern.root, node, &[], &[])?;
        if embeddings.is_empty() {
            continue;
        }
        let mut captures: BTreeMap<String, BTreeSet<usize>> =
            names.iter().map(|n| (n.clone(), BTreeSet::new())).collect();
        for (b, _) in &embeddings {
            for (name, pos) in b {
                captures.get_mut(name).unwrap().insert(*pos);
            }
        }
        out.push(MatchResult {
            root: node.id(),
            captures: if names.is_empty() {
                BTreeMap::new()
            } else {
                captures
                    .into_iter()
                    .map(|(k, v)| (k, v.into_iter().map(|p| tree.named_at(p).id()).collect()))
                    .collect()
            },
        });
    }
    Ok(out)
}
