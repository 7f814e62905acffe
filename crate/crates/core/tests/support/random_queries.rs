//! Random trees and patterns for differential testing of the matcher.

use std::borrow::Cow;

use metriscope_core::query::{brute_force_match, AttributeOracle, Query};
use metriscope_core::syntax::{
    KindRule, NodeCategoryTable, SourceFunction, SyntaxNode, SyntaxTree, TreeBuilder,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const KINDS: [&str; 4] = ["a", "b", "c", "d"];
const FIELDS: [&str; 2] = ["f", "g"];

/// Holds for nodes whose span starts at an even offset.
struct EvenSpans;

impl AttributeOracle for EvenSpans {
    fn holds(&self, node: SyntaxNode<'_>, key: &str, value: &str) -> bool {
        key == "p" && value == "x" && node.span().start.is_multiple_of(2)
    }
}

fn table() -> NodeCategoryTable {
    let mut t = NodeCategoryTable::new(KINDS);
    t.insert("ab", vec![KindRule::kind("a"), KindRule::kind("b")]);
    t
}

fn random_tree(rng: &mut ChaCha8Rng) -> SyntaxTree {
    fn grow(
        rng: &mut ChaCha8Rng,
        b: &mut TreeBuilder,
        depth: usize,
        next: &mut usize,
        field: bool,
    ) {
        let kind = KINDS[rng.random_range(0..KINDS.len())];
        let field = (field && rng.random_bool(0.4))
            .then(|| Cow::Borrowed(FIELDS[rng.random_range(0..FIELDS.len())]));
        let start = *next;
        *next += 1;
        b.open(kind, field, true, start..start + 1);
        if depth > 0 {
            for _ in 0..rng.random_range(0..4usize) {
                if rng.random_bool(0.15) {
                    let s = *next;
                    *next += 1;
                    b.leaf("+", None, false, s..s + 1);
                } else {
                    grow(rng, b, depth - 1, next, true);
                }
            }
        }
        b.close();
    }
    let mut b = TreeBuilder::new();
    let mut next = 0;
    let depth = rng.random_range(1..5);
    grow(rng, &mut b, depth, &mut next, false);
    b.finish(SourceFunction::new("r", ""), false)
}

struct PatternGen<'r> {
    rng: &'r mut ChaCha8Rng,
    captures: usize,
}

impl PatternGen<'_> {
    fn node(&mut self, depth: usize) -> String {
        let kind = match self.rng.random_range(0..7) {
            0 => "_".to_string(),
            1 => "ab".to_string(),
            2 => format!("!{}", KINDS[self.rng.random_range(0..KINDS.len())]),
            _ => KINDS[self.rng.random_range(0..KINDS.len())].to_string(),
        };
        let mut s = format!("({kind}");
        if self.rng.random_bool(0.15) {
            s.push_str(" {p: 'x'}");
        }
        if self.rng.random_bool(0.15) {
            s.push_str(&format!(
                " !{}",
                FIELDS[self.rng.random_range(0..FIELDS.len())]
            ));
        }
        if depth > 0 {
            for _ in 0..self.rng.random_range(0..3usize) {
                s.push(' ');
                s.push_str(&self.child(depth - 1));
            }
        }
        s.push(')');
        s
    }

    fn atom(&mut self, depth: usize) -> String {
        match self.rng.random_range(0..10) {
            0 if depth > 0 => format!("({} | {})", self.node(depth - 1), self.node(depth - 1)),
            1 if depth > 0 => format!("({} {})", self.group_item(depth - 1), self.node(depth - 1)),
            _ => self.node(depth),
        }
    }

    fn group_item(&mut self, depth: usize) -> String {
        let q = ["", "^*", "^+"][self.rng.random_range(0..3)];
        format!("{}{q}", self.node(depth))
    }

    fn capture(&mut self) -> String {
        if self.rng.random_bool(0.25) {
            self.captures += 1;
            format!(" @c{}", self.captures)
        } else {
            String::new()
        }
    }

    fn child(&mut self, depth: usize) -> String {
        let field = if self.rng.random_bool(0.2) {
            format!("{}: ", FIELDS[self.rng.random_range(0..FIELDS.len())])
        } else {
            String::new()
        };
        let q = ["", "", "*", "+", "^*", "^+"][self.rng.random_range(0..6)];
        let atom = self.atom(depth);
        let cap = self.capture();
        format!("{field}{atom}{q}{cap}")
    }

    fn root(&mut self) -> String {
        let atom = self.atom(3);
        let cap = self.capture();
        format!("{atom}{cap}")
    }
}

pub struct Outcome {
    pub matched: usize,
    pub rejected: usize,
}

/// Compares the matcher with the exhaustive reference on `cases` accepted
/// patterns. Patterns the parser rejects are drawn again.
pub fn differential(cases: usize, seed: u64) -> Result<Outcome, String> {
    let table = table();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut checked, mut matched, mut rejected) = (0, 0, 0);
    while checked < cases {
        let t = random_tree(&mut rng);
        let text = PatternGen {
            rng: &mut rng,
            captures: 0,
        }
        .root();
        let Ok(q) = Query::parse(&text, &table) else {
            rejected += 1;
            continue;
        };
        let fast = q.matches(&t, &EvenSpans);
        let slow =
            brute_force_match(&t, q.pattern(), &table, &EvenSpans).map_err(|e| e.to_string())?;
        if fast != slow {
            return Err(format!("pattern {text} on case {checked}"));
        }
        if q.count(&t, &EvenSpans) != fast.len() {
            return Err(format!("count disagrees for {text}"));
        }
        matched += usize::from(!fast.is_empty());
        checked += 1;
    }
    Ok(Outcome { matched, rejected })
}
