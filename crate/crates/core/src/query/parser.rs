use std::collections::HashSet;

use super::{Attribute, Item, KindMatcher, NodePattern, Pattern, Quantifier, QueryPattern};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBrace,
    RBrace,
    Pipe,
    Bang,
    Colon,
    Comma,
    Star,
    Plus,
    DescStar,
    DescPlus,
    BadQuantifier(String),
    Capture(String),
    Name(String),
    Str(String),
    Eof,
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

fn err(offset: usize, message: impl Into<String>) -> Error {
    Error::QuerySyntax {
        offset,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        chars.next();
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '|' => Tok::Pipe,
            '!' => Tok::Bang,
            ':' => Tok::Colon,
            ',' => Tok::Comma,
            '*' => Tok::Star,
            '+' => Tok::Plus,
            '?' => Tok::BadQuantifier("?".into()),
            '^' => match chars.peek().map(|&(_, c)| c) {
                Some('*') => {
                    chars.next();
                    Tok::DescStar
                }
                Some('+') => {
                    chars.next();
                    Tok::DescPlus
                }
                Some(other) => {
                    chars.next();
                    Tok::BadQuantifier(format!("^{other}"))
                }
                None => Tok::BadQuantifier("^".into()),
            },
            '@' => {
                let mut name = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if !is_name_char(c) {
                        break;
                    }
                    name.push(c);
                    chars.next();
                }
                if name.is_empty() {
                    return Err(err(i, "expected capture name after `@`"));
                }
                Tok::Capture(name)
            }
            '\'' | '"' => {
                let quote = c;
                let mut value = String::new();
                let mut closed = false;
                for (_, c) in chars.by_ref() {
                    if c == quote {
                        closed = true;
                        break;
                    }
                    value.push(c);
                }
                if !closed {
                    return Err(err(i, "unterminated string"));
                }
                Tok::Str(value)
            }
            c if is_name_char(c) => {
                let mut name = c.to_string();
                while let Some(&(_, c)) = chars.peek() {
                    if !is_name_char(c) {
                        break;
                    }
                    name.push(c);
                    chars.next();
                }
                Tok::Name(name)
            }
            other => return Err(err(i, format!("unexpected character `{other}`"))),
        };
        out.push((tok, i));
    }
    out.push((Tok::Eof, text.len()));
    Ok(out)
}

/// Where an item appears; decides which quantifiers are legal.
#[derive(Clone, Copy, PartialEq)]
enum Slot {
    Root,
    Child,
    Path,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    captures: HashSet<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn name(&mut self, what: &str) -> Result<String> {
        match self.bump() {
            (Tok::Name(n), _) => Ok(n),
            (_, off) => Err(err(off, format!("expected {what}"))),
        }
    }

    fn item(&mut self, slot: Slot) -> Result<Item> {
        let start = self.offset();
        let field = if matches!(self.peek(), Tok::Name(_)) && *self.peek2() == Tok::Colon {
            let f = self.name("field name")?;
            self.bump();
            Some(f)
        } else {
            None
        };
        let open = match self.bump() {
            (Tok::LParen, off) => off,
            (_, off) => return Err(err(off, "expected `(`")),
        };
        let pattern = self.pattern(open)?;

        let quant_off = self.offset();
        let quantifier = match self.peek().clone() {
            Tok::Star => Quantifier::Star,
            Tok::Plus => Quantifier::Plus,
            Tok::DescStar => Quantifier::DescendStar,
            Tok::DescPlus => Quantifier::DescendPlus,
            Tok::BadQuantifier(q) => {
                return Err(err(quant_off, format!("unknown quantifier `{q}`")))
            }
            _ => Quantifier::One,
        };
        if quantifier != Quantifier::One {
            self.bump();
            match slot {
                Slot::Root => {
                    return Err(err(quant_off, "quantifiers may only appear on child items"))
                }
                Slot::Path if quantifier.is_sibling() => {
                    return Err(err(
                        quant_off,
                        "sibling quantifiers are not allowed inside groups or alternatives",
                    ))
                }
                _ => {}
            }
        }

        let capture = match self.peek().clone() {
            Tok::Capture(name) => {
                let off = self.offset();
                self.bump();
                if !self.captures.insert(name.clone()) {
                    return Err(err(off, format!("duplicate capture `@{name}`")));
                }
                Some(name)
            }
            _ => None,
        };
        if (field.is_some() || capture.is_some()) && !node_like(&pattern) {
            return Err(err(
                start,
                "fields and captures must apply to a node pattern or an alternative of node patterns",
            ));
        }
        Ok(Item {
            field,
            pattern,
            quantifier,
            capture,
        })
    }

    /// Parses after an opening parenthesis at `open`.
    fn pattern(&mut self, open: usize) -> Result<Pattern> {
        let kind = match self.peek().clone() {
            Tok::Name(n) if *self.peek2() != Tok::Colon => {
                self.bump();
                if n == "_" {
                    KindMatcher::Wildcard
                } else {
                    KindMatcher::Name(n)
                }
            }
            Tok::Bang => {
                self.bump();
                KindMatcher::Not(self.name("node kind after `!`")?)
            }
            Tok::LBrace => KindMatcher::Wildcard,
            Tok::LParen | Tok::Name(_) => return self.compound(open),
            Tok::RParen => return Err(err(self.offset(), "empty pattern")),
            Tok::Eof => return Err(err(open, "unbalanced parentheses: `(` is never closed")),
            _ => return Err(err(self.offset(), "expected node kind, `_`, `!` or `(`")),
        };
        let mut node = NodePattern {
            kind,
            attributes: Vec::new(),
            negated_fields: Vec::new(),
            children: Vec::new(),
        };
        let mut descendant_item: Option<usize> = None;
        loop {
            match self.peek() {
                Tok::RParen => {
                    self.bump();
                    return Ok(Pattern::Node(node));
                }
                Tok::Bang => {
                    self.bump();
                    node.negated_fields.push(self.name("field name after `!`")?);
                }
                Tok::LBrace => {
                    self.bump();
                    self.attributes(&mut node.attributes)?;
                }
                Tok::LParen | Tok::Name(_) => {
                    let off = self.offset();
                    let item = self.item(Slot::Child)?;
                    if item.quantifier.is_descendant() {
                        if descendant_item.is_some() {
                            return Err(err(
                                off,
                                "at most one descendant-quantified item per child list",
                            ));
                        }
                        descendant_item = Some(off);
                    }
                    node.children.push(item);
                }
                Tok::Eof => return Err(err(open, "unbalanced parentheses: `(` is never closed")),
                Tok::BadQuantifier(q) => {
                    return Err(err(self.offset(), format!("unknown quantifier `{q}`")))
                }
                _ => return Err(err(self.offset(), "unexpected token in node pattern")),
            }
        }
    }

    fn compound(&mut self, open: usize) -> Result<Pattern> {
        let mut items = vec![self.item(Slot::Path)?];
        if *self.peek() == Tok::Pipe {
            while *self.peek() == Tok::Pipe {
                self.bump();
                items.push(self.item(Slot::Path)?);
            }
            self.close(open)?;
            return Ok(Pattern::Alternative(items));
        }
        loop {
            match self.peek() {
                Tok::RParen => {
                    self.bump();
                    return Ok(Pattern::Group(items));
                }
                Tok::Eof => return Err(err(open, "unbalanced parentheses: `(` is never closed")),
                Tok::Pipe => return Err(err(self.offset(), "misplaced `|`")),
                _ => items.push(self.item(Slot::Path)?),
            }
        }
    }

    fn close(&mut self, open: usize) -> Result<()> {
        match self.bump() {
            (Tok::RParen, _) => Ok(()),
            (Tok::Eof, _) => Err(err(open, "unbalanced parentheses: `(` is never closed")),
            (_, off) => Err(err(off, "expected `)`")),
        }
    }

    fn attributes(&mut self, out: &mut Vec<Attribute>) -> Result<()> {
        loop {
            let key = self.name("attribute name")?;
            match self.bump() {
                (Tok::Colon, _) => {}
                (_, off) => return Err(err(off, "expected `:` after attribute name")),
            }
            let value = match self.bump() {
                (Tok::Str(s), _) | (Tok::Name(s), _) => s,
                (_, off) => return Err(err(off, "expected attribute value")),
            };
            out.push(Attribute { key, value });
            match self.bump() {
                (Tok::Comma, _) => continue,
                (Tok::RBrace, _) => return Ok(()),
                (_, off) => return Err(err(off, "expected `,` or `}`")),
            }
        }
    }
}

fn node_like(p: &Pattern) -> bool {
    match p {
        Pattern::Node(_) => true,
        Pattern::Alternative(branches) => branches.iter().all(|b| node_like(&b.pattern)),
        Pattern::Group(_) => false,
    }
}

/// Parses query text into a pattern.
pub fn parse_query(text: &str) -> Result<QueryPattern> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        captures: HashSet::new(),
    };
    let root = p.item(Slot::Root)?;
    if *p.peek() != Tok::Eof {
        return Err(err(p.offset(), "trailing input after pattern"));
    }
    Ok(QueryPattern { root })
}
