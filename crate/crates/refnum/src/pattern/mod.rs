//! The condition language matched against dependency subtrees.
//!
//! A pattern is written in an extension of the tree text format:
//!
//! ```text
//! ( <[noun -] - >
//!    ( <[referential-pronominal _ _ _ 'SONO' 'SONO']> ) - )
//! ```
//!
//! reads "a noun bunsetsu, whatever its remaining morphemes, one of whose
//! modifiers is the bare SONO phrase; further modifiers allowed". The pieces:
//!
//! - `( <items> children )` — a node template. Morpheme items are matched
//!   in order against the node's whole morpheme list; child patterns each
//!   bind a distinct modifier, order-insensitively.
//! - `-` — a glob. Inside `[...]` it absorbs a run of fields, inside `<...>`
//!   a run of morphemes; among child patterns it allows unmatched modifiers;
//!   on its own it matches any subtree.
//! - `[f1 f2 ...]` — a morpheme template. A field item is a literal token,
//!   a quoted literal, `_` (any single field), `/re/` (see
//!   [`regex::MiniRegex`] for the dialect), `$x` (a numeral field, binding
//!   `x`), or `-`.
//! - `(and p ...)`, `(or p ...)`, `(not p)` — boolean combinators.
//! - `(modee p)` — `p` must match the node's modifiee (its parent);
//!   `(modee* p)` — some ancestor.
//! - `(numguard x >= 2)` — compares a numeral bound by `$x`; comparators
//!   `=`, `>=`, `<=`. Guards apply to bindings established by the other
//!   conjuncts of the enclosing `and`.
//! - `(refprop definite)`, `(number plural)` — the node's already-decided
//!   annotation; `(seen-before)` — the node's head lemma occurred earlier
//!   in the document.
//!
//! Patterns are immutable and matching is read-only, so both can be shared
//! freely across threads.

mod matching;
mod parse;
pub mod regex;

use std::collections::BTreeMap;
use std::fmt;

use crate::engine::DiscourseContext;
use crate::tree::{NumberCat, RefProp, Sentence};

pub use self::matching::matches;
pub use self::parse::{parse_pattern, PatternParseError};
pub use self::regex::MiniRegex;

/// One field slot of a morpheme template.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldPattern {
    /// `_`: any single field, blank included.
    Any,
    /// A bare or quoted token, compared verbatim.
    Literal(String),
    /// `/re/`, anchored over the whole field.
    Regex(MiniRegex),
    /// `$x`: a numeral-valued field (decimal or kanji, 1–9999); binds `x`.
    NumBind(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldItem {
    Pat(FieldPattern),
    /// `-`: a run of zero or more fields.
    Gap,
}

/// Matched against a morpheme's six lexical fields.
#[derive(Debug, Clone, PartialEq)]
pub struct MorphemeTemplate {
    pub items: Vec<FieldItem>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MorphItem {
    Template(MorphemeTemplate),
    /// `-`: a run of zero or more morphemes.
    Gap,
}

/// A node template: ordered morpheme items plus set-like child patterns.
///
/// `allow_extra` is set when a `-` appears among the children; without it
/// every modifier must be bound by some child pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTemplate {
    pub morphemes: Vec<MorphItem>,
    pub children: Vec<Pattern>,
    pub allow_extra: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Ge,
    Le,
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Le => "<=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    Template(NodeTemplate),
    /// Bare `-`: matches any subtree.
    AnySubtree,
    And(Vec<Pattern>),
    Or(Vec<Pattern>),
    Not(Box<Pattern>),
    /// Direct modifiee.
    Modee(Box<Pattern>),
    /// Any proper ancestor.
    ModeeStar(Box<Pattern>),
    NumGuard {
        binder: String,
        cmp: Cmp,
        value: i64,
    },
    RefPropIs(RefProp),
    NumberIs(NumberCat),
    SeenBefore,
}

impl Pattern {
    /// Binders introduced by `$x` field patterns anywhere in the pattern.
    pub fn binders(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |p| {
            if let Pattern::Template(t) = p {
                for item in &t.morphemes {
                    if let MorphItem::Template(mt) = item {
                        for f in &mt.items {
                            if let FieldItem::Pat(FieldPattern::NumBind(name)) = f {
                                out.push(name.clone());
                            }
                        }
                    }
                }
            }
        });
        out.sort();
        out.dedup();
        out
    }

    /// Binders referenced by `numguard` forms.
    pub fn guards(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.walk(&mut |p| {
            if let Pattern::NumGuard { binder, .. } = p {
                out.push(binder.clone());
            }
        });
        out
    }

    /// True if the pattern anywhere consults a decided number category.
    pub fn reads_number(&self) -> bool {
        let mut found = false;
        self.walk(&mut |p| {
            if matches!(p, Pattern::NumberIs(_)) {
                found = true;
            }
        });
        found
    }

    fn walk(&self, f: &mut impl FnMut(&Pattern)) {
        f(self);
        match self {
            Pattern::Template(t) => {
                for c in &t.children {
                    c.walk(f);
                }
            }
            Pattern::And(ps) | Pattern::Or(ps) => {
                for p in ps {
                    p.walk(f);
                }
            }
            Pattern::Not(p) | Pattern::Modee(p) | Pattern::ModeeStar(p) => p.walk(f),
            _ => {}
        }
    }
}

/// Everything a match can consult besides the node itself.
pub struct MatchContext<'a> {
    pub sentence: &'a Sentence,
    pub discourse: &'a DiscourseContext,
}

impl<'a> MatchContext<'a> {
    pub fn new(sentence: &'a Sentence, discourse: &'a DiscourseContext) -> Self {
        MatchContext {
            sentence,
            discourse,
        }
    }
}

pub type Bindings = BTreeMap<String, i64>;

/// Outcome of a match: whether it succeeded, and the distinct numeral
/// binding environments of the successful alignments.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub matched: bool,
    pub bindings: Vec<Bindings>,
}

/// Reads a numeral field: ASCII decimal digits, or kanji numerals composed
/// from 一..九 with 十/百/千, covering 1–9999.
pub fn parse_numeral(text: &str) -> Option<i64> {
    if text.is_empty() {
        return None;
    }
    if text.chars().all(|c| c.is_ascii_digit()) {
        return text.parse::<i64>().ok().filter(|v| *v > 0);
    }
    let digit = |c: char| {
        "一二三四五六七八九"
            .chars()
            .position(|k| k == c)
            .map(|i| i as i64 + 1)
    };
    let mut total = 0i64;
    let mut current = 0i64;
    for c in text.chars() {
        if let Some(d) = digit(c) {
            if current != 0 {
                return None;
            }
            current = d;
        } else {
            let mult = match c {
                '十' => 10,
                '百' => 100,
                '千' => 1000,
                _ => return None,
            };
            total += if current == 0 { 1 } else { current } * mult;
            current = 0;
        }
    }
    total += current;
    (1..=9999).contains(&total).then_some(total)
}

impl fmt::Display for FieldPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldPattern::Any => f.write_str("_"),
            FieldPattern::Literal(s) => {
                if s.chars()
                    .any(|c| c.is_whitespace() || "()<>[]`'#/$".contains(c))
                    || s == "_"
                    || s == "-"
                {
                    write!(f, "'{s}'")
                } else {
                    f.write_str(s)
                }
            }
            FieldPattern::Regex(r) => write!(f, "/{r}/"),
            FieldPattern::NumBind(name) => write!(f, "${name}"),
        }
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::Template(t) => {
                f.write_str("( <")?;
                for (i, item) in t.morphemes.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" ")?;
                    }
                    match item {
                        MorphItem::Gap => f.write_str("-")?,
                        MorphItem::Template(mt) => {
                            f.write_str("[")?;
                            for (j, field) in mt.items.iter().enumerate() {
                                if j > 0 {
                                    f.write_str(" ")?;
                                }
                                match field {
                                    FieldItem::Gap => f.write_str("-")?,
                                    FieldItem::Pat(p) => write!(f, "{p}")?,
                                }
                            }
                            f.write_str("]")?;
                        }
                    }
                }
                f.write_str(">")?;
                for c in &t.children {
                    write!(f, " {c}")?;
                }
                if t.allow_extra {
                    f.write_str(" -")?;
                }
                f.write_str(" )")
            }
            Pattern::AnySubtree => f.write_str("-"),
            Pattern::And(ps) => {
                f.write_str("(and")?;
                for p in ps {
                    write!(f, " {p}")?;
                }
                f.write_str(")")
            }
            Pattern::Or(ps) => {
                f.write_str("(or")?;
                for p in ps {
                    write!(f, " {p}")?;
                }
                f.write_str(")")
            }
            Pattern::Not(p) => write!(f, "(not {p})"),
            Pattern::Modee(p) => write!(f, "(modee {p})"),
            Pattern::ModeeStar(p) => write!(f, "(modee* {p})"),
            Pattern::NumGuard { binder, cmp, value } => {
                write!(f, "(numguard {binder} {cmp} {value})")
            }
            Pattern::RefPropIs(c) => write!(f, "(refprop {c})"),
            Pattern::NumberIs(c) => write!(f, "(number {c})"),
            Pattern::SeenBefore => f.write_str("(seen-before)"),
        }
    }
}
