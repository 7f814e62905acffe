//! Compiled queries.
//!
//! Every item in a child position is compiled to a small automaton over
//! downward chains of nodes (an atom transition consumes one node, the next
//! atom consumes one of its named children). Matching runs bottom-up over
//! the named pre-order in reverse, so each node's answers only depend on
//! answers already computed for its children.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{
    Attribute, AttributeOracle, Item, KindMatcher, MatchResult, Pattern, Quantifier, QueryPattern,
};
use crate::error::{Error, Result};
use crate::syntax::{KindRule, NodeCategoryTable, SyntaxNode, SyntaxTree};

#[derive(Clone, Debug)]
enum KindTest {
    Any,
    Kind(String),
    Rules(Vec<KindRule>),
    Not(Box<KindTest>),
}

impl KindTest {
    fn compile(m: &KindMatcher, table: &NodeCategoryTable) -> Result<Self> {
        let named = |name: &str| -> Result<KindTest> {
            if let Some(rules) = table.rules(name) {
                Ok(KindTest::Rules(rules.to_vec()))
            } else if table.is_concrete_kind(name) {
                Ok(KindTest::Kind(name.to_string()))
            } else {
                Err(Error::UnknownKind(name.to_string()))
            }
        };
        Ok(match m {
            KindMatcher::Wildcard => KindTest::Any,
            KindMatcher::Name(n) => named(n)?,
            KindMatcher::Not(n) => KindTest::Not(Box::new(named(n)?)),
        })
    }

    fn test(&self, node: SyntaxNode<'_>) -> bool {
        match self {
            KindTest::Any => true,
            KindTest::Kind(k) => node.kind() == k,
            KindTest::Rules(rules) => rules.iter().any(|r| r.matches(node)),
            KindTest::Not(inner) => !inner.test(node),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Take {
    /// At most one child; zero only when the item is nullable.
    Single,
    Star,
    Plus,
}

#[derive(Clone, Debug)]
struct ChildSpec {
    start: usize,
    take: Take,
    nullable: bool,
}

#[derive(Clone, Debug)]
struct NodeSpec {
    kind: KindTest,
    attributes: Vec<Attribute>,
    negated_fields: Vec<String>,
    items: Vec<ChildSpec>,
}

#[derive(Clone, Debug)]
struct AtomSpec {
    node: usize,
    fields: Vec<String>,
    captures: Vec<String>,
}

#[derive(Clone, Debug, Default)]
struct State {
    eps: Vec<usize>,
    atoms: Vec<(usize, usize)>,
}

/// A query compiled against a category table.
#[derive(Clone, Debug)]
pub struct Query {
    pattern: QueryPattern,
    capture_names: Vec<String>,
    nodes: Vec<NodeSpec>,
    atoms: Vec<AtomSpec>,
    /// Atom transitions reachable through epsilon moves, per state.
    trans: Vec<Vec<(usize, usize)>>,
    /// Whether the accepting state is epsilon-reachable, per state.
    accepts: Vec<bool>,
    root_start: usize,
}

struct Builder<'a> {
    table: &'a NodeCategoryTable,
    states: Vec<State>,
    nodes: Vec<NodeSpec>,
    atoms: Vec<AtomSpec>,
    /// Fragment each state belongs to, and each fragment's accepting state.
    owner: Vec<usize>,
    frag_accept: Vec<usize>,
    current: Vec<usize>,
}

impl Builder<'_> {
    fn state(&mut self) -> usize {
        self.states.push(State::default());
        self.owner.push(*self.current.last().unwrap());
        self.states.len() - 1
    }

    fn eps(&mut self, from: usize, to: usize) {
        self.states[from].eps.push(to);
    }

    /// Compiles an item into its own automaton; returns the start state.
    fn fragment_root(&mut self, item: &Item) -> Result<usize> {
        let id = self.frag_accept.len();
        self.frag_accept.push(usize::MAX);
        self.current.push(id);
        let (s, e) = self.fragment(item, &[], &[])?;
        self.current.pop();
        self.frag_accept[id] = e;
        Ok(s)
    }

    fn fragment(
        &mut self,
        item: &Item,
        fields: &[String],
        captures: &[String],
    ) -> Result<(usize, usize)> {
        let mut fields = fields.to_vec();
        fields.extend(item.field.iter().cloned());
        let mut captures = captures.to_vec();
        captures.extend(item.capture.iter().cloned());

        let (cs, ce) = match &item.pattern {
            Pattern::Node(np) => {
                let node = self.node(np)?;
                self.atoms.push(AtomSpec {
                    node,
                    fields,
                    captures,
                });
                let atom = self.atoms.len() - 1;
                let (s, e) = (self.state(), self.state());
                self.states[s].atoms.push((atom, e));
                (s, e)
            }
            Pattern::Alternative(branches) => {
                let (s, e) = (self.state(), self.state());
                for b in branches {
                    let (bs, be) = self.fragment(b, &fields, &captures)?;
                    self.eps(s, bs);
                    self.eps(be, e);
                }
                (s, e)
            }
            Pattern::Group(items) => {
                let s = self.state();
                let mut last = s;
                for it in items {
                    let (is, ie) = self.fragment(it, &[], &[])?;
                    self.eps(last, is);
                    last = ie;
                }
                (s, last)
            }
        };
        Ok(match item.quantifier {
            Quantifier::DescendStar | Quantifier::DescendPlus => {
                let (s, e) = (self.state(), self.state());
                self.eps(s, cs);
                self.eps(ce, cs);
                self.eps(ce, e);
                if item.quantifier == Quantifier::DescendStar {
                    self.eps(s, e);
                }
                (s, e)
            }
            _ => (cs, ce),
        })
    }

    fn node(&mut self, np: &super::NodePattern) -> Result<usize> {
        let kind = KindTest::compile(&np.kind, self.table)?;
        let mut items = Vec::with_capacity(np.children.len());
        for child in &np.children {
            let take = match child.quantifier {
                Quantifier::Star => Take::Star,
                Quantifier::Plus => Take::Plus,
                _ => Take::Single,
            };
            let start = if take == Take::Single {
                self.fragment_root(child)?
            } else {
                let base = Item {
                    quantifier: Quantifier::One,
                    ..child.clone()
                };
                self.fragment_root(&base)?
            };
            items.push(ChildSpec {
                start,
                take,
                nullable: child.nullable(),
            });
        }
        self.nodes.push(NodeSpec {
            kind,
            attributes: np.attributes.clone(),
            negated_fields: np.negated_fields.clone(),
            items,
        });
        Ok(self.nodes.len() - 1)
    }
}

/// Feasibility tables for assigning child items to `k` children in order.
/// `f[i][j]`: items `i..` fit in children `j..`.
fn suffix_table(items: &[ChildSpec], k: usize, u: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let m = items.len();
    let mut f = vec![vec![false; k + 1]; m + 1];
    f[m].fill(true);
    for i in (0..m).rev() {
        let mut g = false;
        for j in (0..=k).rev() {
            if j < k && u[i][j] && f[i + 1][j + 1] {
                g = true;
            }
            f[i][j] = match items[i].take {
                Take::Star => f[i + 1][j],
                Take::Plus => g,
                Take::Single => g || (items[i].nullable && f[i + 1][j]),
            };
        }
    }
    f
}

/// `p[i][j]`: items `..i` fit in children `..j`.
fn prefix_table(items: &[ChildSpec], k: usize, u: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let m = items.len();
    let mut p = vec![vec![false; k + 1]; m + 1];
    p[0].fill(true);
    for i in 0..m {
        let mut h = false;
        for j in 0..=k {
            p[i + 1][j] = match items[i].take {
                Take::Star => p[i][j],
                Take::Plus => h,
                Take::Single => h || (items[i].nullable && p[i][j]),
            };
            if j < k && u[i][j] && p[i][j] {
                h = true;
            }
        }
    }
    p
}

struct Tables {
    states: usize,
    nodes: usize,
    co: Vec<bool>,
    below: Vec<bool>,
    nok: Vec<bool>,
}

impl Query {
    /// Resolves names against `table` and compiles the pattern.
    pub fn new(pattern: QueryPattern, table: &NodeCategoryTable) -> Result<Self> {
        if pattern.root.nullable() {
            return Err(Error::QuerySyntax {
                offset: 0,
                message: "the root pattern must match at least one node".into(),
            });
        }
        let mut b = Builder {
            table,
            states: Vec::new(),
            nodes: Vec::new(),
            atoms: Vec::new(),
            owner: Vec::new(),
            frag_accept: Vec::new(),
            current: Vec::new(),
        };
        let root_start = b.fragment_root(&pattern.root)?;

        let n = b.states.len();
        let mut trans = Vec::with_capacity(n);
        let mut accepts = Vec::with_capacity(n);
        for q in 0..n {
            let mut seen = vec![false; n];
            let mut stack = vec![q];
            seen[q] = true;
            let mut t = Vec::new();
            let mut acc = false;
            while let Some(s) = stack.pop() {
                if s == b.frag_accept[b.owner[q]] {
                    acc = true;
                }
                t.extend(b.states[s].atoms.iter().copied());
                for &e in &b.states[s].eps {
                    if !seen[e] {
                        seen[e] = true;
                        stack.push(e);
                    }
                }
            }
            t.sort_unstable();
            t.dedup();
            trans.push(t);
            accepts.push(acc);
        }
        Ok(Query {
            capture_names: pattern.capture_names(),
            pattern,
            nodes: b.nodes,
            atoms: b.atoms,
            trans,
            accepts,
            root_start,
        })
    }

    /// Parses and compiles in one step.
    pub fn parse(text: &str, table: &NodeCategoryTable) -> Result<Self> {
        Query::new(super::parse_query(text)?, table)
    }

    pub fn pattern(&self) -> &QueryPattern {
        &self.pattern
    }

    pub fn capture_names(&self) -> &[String] {
        &self.capture_names
    }

    fn atom_ok(&self, t: &Tables, atom: usize, pos: usize, node: SyntaxNode<'_>) -> bool {
        let a = &self.atoms[atom];
        t.nok[pos * t.nodes + a.node]
            && a.fields
                .iter()
                .all(|f| node.field_label() == Some(f.as_str()))
    }

    fn usable(&self, t: &Tables, spec: &NodeSpec, children: &[usize]) -> Vec<Vec<bool>> {
        spec.items
            .iter()
            .map(|it| {
                children
                    .iter()
                    .map(|&c| t.co[c * t.states + it.start])
                    .collect()
            })
            .collect()
    }

    fn tables<O: AttributeOracle + ?Sized>(&self, tree: &SyntaxTree, oracle: &O) -> Tables {
        let n = tree.named_count();
        let mut t = Tables {
            states: self.trans.len(),
            nodes: self.nodes.len(),
            co: vec![false; n * self.trans.len()],
            below: vec![false; n * self.trans.len()],
            nok: vec![false; n * self.nodes.len()],
        };
        let s = t.states;
        let mut children = Vec::new();
        for pos in (0..n).rev() {
            let x = tree.named_at(pos);
            children.clear();
            children.extend(x.named_children().map(|c| c.named_pos().unwrap()));
            for &c in &children {
                for q in 0..s {
                    if t.co[c * s + q] {
                        t.below[pos * s + q] = true;
                    }
                }
            }
            for (pi, spec) in self.nodes.iter().enumerate() {
                let ok = spec.kind.test(x)
                    && spec
                        .attributes
                        .iter()
                        .all(|a| oracle.holds(x, &a.key, &a.value))
                    && spec.negated_fields.iter().all(|f| !x.has_field(f))
                    && (spec.items.is_empty() || {
                        let u = self.usable(&t, spec, &children);
                        suffix_table(&spec.items, children.len(), &u)[0][0]
                    });
                t.nok[pos * t.nodes + pi] = ok;
            }
            for q in 0..s {
                t.co[pos * s + q] = self.trans[q].iter().any(|&(a, q2)| {
                    self.atom_ok(&t, a, pos, x) && (self.accepts[q2] || t.below[pos * s + q2])
                });
            }
        }
        t
    }

    fn collect(&self, tree: &SyntaxTree, t: &Tables, root: usize) -> BTreeMap<String, Vec<usize>> {
        #[derive(Clone, Copy, PartialEq, Eq, Hash)]
        enum Task {
            State(usize, usize),
            Node(usize, usize),
        }
        let s = t.states;
        let mut found: BTreeMap<String, BTreeSet<usize>> = self
            .capture_names
            .iter()
            .map(|c| (c.clone(), BTreeSet::new()))
            .collect();
        let mut seen = HashSet::new();
        let mut work = vec![Task::State(self.root_start, root)];
        seen.insert(work[0]);
        let mut push = |task: Task, work: &mut Vec<Task>| {
            if seen.insert(task) {
                work.push(task);
            }
        };
        while let Some(task) = work.pop() {
            match task {
                Task::State(q, pos) => {
                    let x = tree.named_at(pos);
                    for &(a, q2) in &self.trans[q] {
                        let deeper = t.below[pos * s + q2];
                        if !self.atom_ok(t, a, pos, x) || !(self.accepts[q2] || deeper) {
                            continue;
                        }
                        for c in &self.atoms[a].captures {
                            found.get_mut(c).unwrap().insert(pos);
                        }
                        push(Task::Node(self.atoms[a].node, pos), &mut work);
                        if deeper {
                            for c in x.named_children() {
                                let cp = c.named_pos().unwrap();
                                if t.co[cp * s + q2] {
                                    push(Task::State(q2, cp), &mut work);
                                }
                            }
                        }
                    }
                }
                Task::Node(pi, pos) => {
                    let spec = &self.nodes[pi];
                    if spec.items.is_empty() {
                        continue;
                    }
                    let x = tree.named_at(pos);
                    let children: Vec<usize> =
                        x.named_children().map(|c| c.named_pos().unwrap()).collect();
                    let k = children.len();
                    let u = self.usable(t, spec, &children);
                    let f = suffix_table(&spec.items, k, &u);
                    let p = prefix_table(&spec.items, k, &u);
                    for (i, item) in spec.items.iter().enumerate() {
                        for c in 0..k {
                            if u[i][c] && p[i][c] && f[i + 1][c + 1] {
                                push(Task::State(item.start, children[c]), &mut work);
                            }
                        }
                    }
                }
            }
        }
        found
            .into_iter()
            .map(|(k, v)| (k, v.into_iter().collect()))
            .collect()
    }

    /// All matches in pre-order of their roots.
    pub fn matches<O: AttributeOracle + ?Sized>(
        &self,
        tree: &SyntaxTree,
        oracle: &O,
    ) -> Vec<MatchResult> {
        let t = self.tables(tree, oracle);
        let s = t.states;
        let mut out = Vec::new();
        for pos in 0..tree.named_count() {
            if !t.co[pos * s + self.root_start] {
                continue;
            }
            let captures = if self.capture_names.is_empty() {
                BTreeMap::new()
            } else {
                self.collect(tree, &t, pos)
                    .into_iter()
                    .map(|(k, v)| (k, v.into_iter().map(|p| tree.named_at(p).id()).collect()))
                    .collect()
            };
            out.push(MatchResult {
                root: tree.named_at(pos).id(),
                captures,
            });
        }
        out
    }

    /// Number of matches.
    pub fn count<O: AttributeOracle + ?Sized>(&self, tree: &SyntaxTree, oracle: &O) -> usize {
        let t = self.tables(tree, oracle);
        (0..tree.named_count())
            .filter(|&pos| t.co[pos * t.states + self.root_start])
            .count()
    }
}
