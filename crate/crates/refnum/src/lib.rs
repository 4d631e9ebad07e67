//! Rule-driven annotation of noun phrases in pre-parsed Japanese dependency
//! trees.
//!
//! Japanese has no articles and no plural inflection, so a translation
//! pipeline targeting English must decide, for every noun phrase, how it
//! refers (indefinite / definite / generic) and how many it denotes
//! (singular / plural / uncountable). This crate estimates both categories
//! from surface clues alone: declarative heuristic rules match dependency
//! subtrees and contribute weighted `(possibility, value)` scores per
//! category, and the category with the highest accumulated value wins.
//!
//! The pieces:
//!
//! - [`tree`] — the bracketed dependency-tree text format, parsing and
//!   serialization, and noun enumeration in surface order.
//! - [`pattern`] — the condition language: node/morpheme templates with
//!   wildcards, boolean operators, modifiee navigation, regular expressions
//!   on fields, and numeric guards over bound numerals.
//! - [`rules`] — the rule-file DSL, validation, the shipped starter packs,
//!   and a lint pass for rule authors.
//! - [`engine`] — score aggregation, category decisions, document-level
//!   discourse state, and per-rule firing traces.
//! - [`eval`] — gold-annotation ingestion and the four-outcome score tables
//!   (correct / reasonable / partially correct / incorrect).

pub mod engine;
pub mod eval;
pub mod pattern;
pub mod rules;
pub mod tree;

pub use engine::{annotate_document, apply_rules, decide, Decision, DiscourseContext, Trace};
pub use eval::{classify, evaluate, GoldFile, Outcome, ScoreTable};
pub use pattern::{parse_pattern, MatchContext, Pattern};
pub use rules::{parse_rules, starter_number_pack, starter_refprop_pack, RulePack};
pub use tree::{
    parse_document, parse_tree, serialize, Category, Dimension, Document, Morpheme, NodeId,
    NumberCat, PhraseNode, RefProp, Sentence,
};
