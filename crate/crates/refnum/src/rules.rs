//! The heuristic-rule DSL: parsing, validation, serialization, the shipped
//! starter packs, and a lint pass for rule authors.
//!
//! A rule file is line-oriented:
//!
//! ```text
//! pack refprop "starter referential-property rules" v1 {
//!
//! rule ref-demonstrative
//! note: noun modified by a demonstrative (KONO / SONO / ANO)
//! when:
//!   ( <[noun -] - >
//!     ( <[referential-pronominal -] - > - )
//!     - )
//! scores: indefinite (0, 0) definite (1, 2) generic (0, 0)
//!
//! }
//! ```
//!
//! `#` starts a comment line. A rule is a `rule <id>` header, optional
//! `note:` and `score: assigned` attribute lines, a `when:` block holding
//! one pattern (everything up to the `scores:` line), and a `scores:` line
//! giving `(possibility, value)` for exactly the three categories of the
//! pack's dimension. `score: assigned` marks scores chosen by the rule
//! author rather than taken from an established source; the engine treats
//! both kinds identically.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use thiserror::Error;

use crate::engine;
use crate::pattern::{parse_pattern, Pattern};
use crate::tree::{Category, Dimension, Document, NumberCat, RefProp};

/// One rule's contribution to one category.
///
/// `possibility` 0 vetoes the category outright in the matched context and
/// forces `value` 0; otherwise `value` (0..=10) is added to the category's
/// plausibility total.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CategoryScore {
    possibility: u8,
    value: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("possibility must be 0 or 1, got {0}")]
    Possibility(u8),
    #[error("value must lie in 0..=10, got {0}")]
    Value(u8),
    #[error("possibility 0 requires value 0, got value {0}")]
    VetoWithValue(u8),
}

impl CategoryScore {
    pub fn new(possibility: u8, value: u8) -> Result<CategoryScore, ScoreError> {
        if possibility > 1 {
            return Err(ScoreError::Possibility(possibility));
        }
        if value > 10 {
            return Err(ScoreError::Value(value));
        }
        if possibility == 0 && value != 0 {
            return Err(ScoreError::VetoWithValue(value));
        }
        Ok(CategoryScore { possibility, value })
    }

    pub fn possibility(self) -> u8 {
        self.possibility
    }

    pub fn value(self) -> u8 {
        self.value
    }

    pub fn possible(self) -> bool {
        self.possibility == 1
    }
}

impl fmt::Display for CategoryScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.possibility, self.value)
    }
}

/// A `CategoryScore` per category of one dimension, in `C::ALL` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scores<C: Category> {
    entries: [CategoryScore; 3],
    _marker: PhantomData<C>,
}

impl<C: Category> Scores<C> {
    pub fn new(entries: [CategoryScore; 3]) -> Scores<C> {
        Scores {
            entries,
            _marker: PhantomData,
        }
    }

    pub fn get(&self, category: C) -> CategoryScore {
        self.entries[category.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (C, CategoryScore)> + '_ {
        C::ALL.into_iter().map(|c| (c, self.entries[c.index()]))
    }
}

/// One heuristic rule: a condition over the dependency tree and a score per
/// category of its dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule<C: Category> {
    pub id: String,
    pub condition: Pattern,
    pub scores: Scores<C>,
    pub note: Option<String>,
    /// True when the scores were assigned by the rule author (`score:
    /// assigned` in the file) rather than transcribed from a source.
    pub assigned_scores: bool,
}

/// An ordered set of rules for one dimension. Order never affects decisions
/// (aggregation is commutative); it only fixes serialization.
#[derive(Debug, Clone, PartialEq)]
pub struct RulePack<C: Category> {
    pub name: Option<String>,
    pub version: u32,
    pub rules: Vec<Rule<C>>,
}

impl<C: Category> RulePack<C> {
    pub fn dimension(&self) -> Dimension {
        C::DIMENSION
    }

    pub fn get(&self, id: &str) -> Option<&Rule<C>> {
        self.rules.iter().find(|r| r.id == id)
    }

    /// A new pack holding only the named rules, in the given order.
    /// Missing ids are reported verbatim.
    pub fn subset(&self, ids: &[&str]) -> Result<RulePack<C>, String> {
        let mut rules = Vec::new();
        for id in ids {
            match self.get(id) {
                Some(r) => rules.push(r.clone()),
                None => return Err((*id).to_string()),
            }
        }
        Ok(RulePack {
            name: self.name.clone(),
            version: self.version,
            rules,
        })
    }

    /// An empty pack, used for default-only annotation.
    pub fn empty() -> RulePack<C> {
        RulePack {
            name: None,
            version: 1,
            rules: Vec::new(),
        }
    }
}

/// A parsed pack of either dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyRulePack {
    RefProp(RulePack<RefProp>),
    Number(RulePack<NumberCat>),
}

impl AnyRulePack {
    pub fn dimension(&self) -> Dimension {
        match self {
            AnyRulePack::RefProp(_) => Dimension::RefProp,
            AnyRulePack::Number(_) => Dimension::Number,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RuleParseError {
    #[error("line {line}: {msg}")]
    Header { line: usize, msg: String },
    #[error("rule {rule} (line {line}): {msg}")]
    InRule {
        rule: String,
        line: usize,
        msg: String,
    },
    #[error("duplicate rule id `{rule}` (line {line})")]
    DuplicateId { rule: String, line: usize },
    #[error("rule {rule}: condition must not be a bare negation; anchor it on a noun")]
    NegatedRoot { rule: String },
    #[error("rule {rule}: a {dimension} rule may not consult decided number categories")]
    ReadsNumber { rule: String, dimension: Dimension },
    #[error("pack is for {found}, expected {expected}")]
    WrongDimension {
        expected: Dimension,
        found: Dimension,
    },
}

/// Parses a rule file of either dimension.
pub fn parse_rules(text: &str) -> Result<AnyRulePack, RuleParseError> {
    let header = find_header(text)?;
    match header {
        Dimension::RefProp => Ok(AnyRulePack::RefProp(parse_rule_pack::<RefProp>(text)?)),
        Dimension::Number => Ok(AnyRulePack::Number(parse_rule_pack::<NumberCat>(text)?)),
    }
}

fn find_header(text: &str) -> Result<Dimension, RuleParseError> {
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = line.split_whitespace();
        if words.next() != Some("pack") {
            return Err(RuleParseError::Header {
                line: i + 1,
                msg: "rule files start with a `pack` header".into(),
            });
        }
        return match words.next() {
            Some("refprop") => Ok(Dimension::RefProp),
            Some("number") => Ok(Dimension::Number),
            other => Err(RuleParseError::Header {
                line: i + 1,
                msg: format!("unknown pack dimension {:?}", other.unwrap_or("")),
            }),
        };
    }
    Err(RuleParseError::Header {
        line: 1,
        msg: "empty rule file".into(),
    })
}

/// Parses a rule file for a known dimension, rejecting packs of the other.
pub fn parse_rule_pack<C: Category>(text: &str) -> Result<RulePack<C>, RuleParseError> {
    let found = find_header(text)?;
    if found != C::DIMENSION {
        return Err(RuleParseError::WrongDimension {
            expected: C::DIMENSION,
            found,
        });
    }
    let lines: Vec<&str> = text.lines().collect();
    let mut i = 0;
    // Header line.
    let (name, version, header_closed) = loop {
        let raw = lines[i];
        let line = raw.trim();
        i += 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        break parse_header(line, i)?;
    };
    let mut rules: Vec<Rule<C>> = Vec::new();
    let mut closed = header_closed;
    while i < lines.len() {
        let line = lines[i].trim();
        if line.is_empty() || line.starts_with('#') {
            i += 1;
            continue;
        }
        if line == "}" {
            closed = true;
            i += 1;
            continue;
        }
        if closed {
            return Err(RuleParseError::Header {
                line: i + 1,
                msg: "content after closing `}`".into(),
            });
        }
        let (rule, next) = parse_rule::<C>(&lines, i)?;
        if rules.iter().any(|r| r.id == rule.id) {
            return Err(RuleParseError::DuplicateId {
                rule: rule.id,
                line: i + 1,
            });
        }
        validate_rule(&rule)?;
        rules.push(rule);
        i = next;
    }
    if !closed {
        return Err(RuleParseError::Header {
            line: lines.len(),
            msg: "missing closing `}`".into(),
        });
    }
    Ok(RulePack {
        name,
        version,
        rules,
    })
}

fn parse_header(line: &str, line_no: usize) -> Result<(Option<String>, u32, bool), RuleParseError> {
    let err = |msg: String| RuleParseError::Header { line: line_no, msg };
    let rest = line
        .strip_prefix("pack")
        .ok_or_else(|| err("expected `pack`".into()))?;
    let rest = rest.trim_start();
    let rest = rest
        .strip_prefix("refprop")
        .or_else(|| rest.strip_prefix("number"))
        .ok_or_else(|| err("expected a dimension after `pack`".into()))?;
    let mut rest = rest.trim();
    let mut name = None;
    if let Some(tail) = rest.strip_prefix('"') {
        let end = tail
            .find('"')
            .ok_or_else(|| err("unterminated pack name".into()))?;
        name = Some(tail[..end].to_string());
        rest = tail[end + 1..].trim();
    }
    let (vtok, tail) = match rest.split_once(char::is_whitespace) {
        Some((v, t)) => (v, t.trim()),
        None => (rest, ""),
    };
    let version: u32 = vtok
        .strip_prefix('v')
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| err(format!("expected a version like `v1`, found `{vtok}`")))?;
    let closed = match tail {
        "{" => false,
        "{}" => true,
        other => {
            return Err(err(format!(
                "expected `{{` after the version, found `{other}`"
            )))
        }
    };
    Ok((name, version, closed))
}

fn parse_rule<C: Category>(
    lines: &[&str],
    start: usize,
) -> Result<(Rule<C>, usize), RuleParseError> {
    let header = lines[start].trim();
    let id = header
        .strip_prefix("rule")
        .map(str::trim)
        .filter(|s| !s.is_empty() && !s.contains(char::is_whitespace))
        .ok_or_else(|| RuleParseError::Header {
            line: start + 1,
            msg: format!("expected `rule <id>`, found `{header}`"),
        })?
        .to_string();
    let fail = |line: usize, msg: String| RuleParseError::InRule {
        rule: id.clone(),
        line,
        msg,
    };
    let mut i = start + 1;
    let mut note = None;
    let mut assigned = false;
    // Attribute lines.
    loop {
        if i >= lines.len() {
            return Err(fail(i, "rule is missing its `when:` block".into()));
        }
        let line = lines[i].trim();
        if line.is_empty() || line.starts_with('#') {
            i += 1;
            continue;
        }
        if let Some(text) = line.strip_prefix("note:") {
            note = Some(text.trim().to_string());
            i += 1;
        } else if let Some(text) = line.strip_prefix("score:") {
            if text.trim() != "assigned" {
                return Err(fail(
                    i + 1,
                    format!("unknown score attribute `{}`", text.trim()),
                ));
            }
            assigned = true;
            i += 1;
        } else if line == "when:" {
            i += 1;
            break;
        } else {
            return Err(fail(
                i + 1,
                format!("expected `note:`, `score:` or `when:`, found `{line}`"),
            ));
        }
    }
    // Pattern block: everything until the scores line.
    let when_start = i;
    let mut pattern_text = String::new();
    let scores_line = loop {
        if i >= lines.len() {
            return Err(fail(i, "rule is missing its `scores:` line".into()));
        }
        let line = lines[i].trim();
        if let Some(rest) = line.strip_prefix("scores:") {
            i += 1;
            break rest.trim().to_string();
        }
        if !line.starts_with('#') {
            pattern_text.push_str(lines[i]);
            pattern_text.push('\n');
        }
        i += 1;
    };
    if pattern_text.trim().is_empty() {
        return Err(fail(when_start + 1, "empty `when:` block".into()));
    }
    let condition = parse_pattern(&pattern_text)
        .map_err(|e| fail(when_start + 1, format!("bad condition: {e}")))?;
    let scores = parse_scores::<C>(&scores_line).map_err(|msg| fail(i, msg))?;
    Ok((
        Rule {
            id,
            condition,
            scores,
            note,
            assigned_scores: assigned,
        },
        i,
    ))
}

fn parse_scores<C: Category>(text: &str) -> Result<Scores<C>, String> {
    let mut seen: BTreeMap<usize, CategoryScore> = BTreeMap::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let (name, tail) = rest
            .split_once('(')
            .ok_or_else(|| format!("expected `category (p, v)` entries, found `{rest}`"))?;
        let name = name.trim();
        let cat = C::ALL
            .into_iter()
            .find(|c| c.to_string() == name)
            .ok_or_else(|| format!("`{name}` is not a {} category", C::DIMENSION))?;
        let (body, tail) = tail.split_once(')').ok_or("unterminated score tuple")?;
        let (p, v) = body
            .split_once(',')
            .ok_or("score tuple needs two numbers")?;
        let p: u8 = p
            .trim()
            .parse()
            .map_err(|_| format!("bad possibility `{}`", p.trim()))?;
        let v: u8 = v
            .trim()
            .parse()
            .map_err(|_| format!("bad value `{}`", v.trim()))?;
        let score = CategoryScore::new(p, v).map_err(|e| e.to_string())?;
        if seen.insert(cat.index(), score).is_some() {
            return Err(format!("duplicate category `{name}`"));
        }
        rest = tail.trim();
    }
    if seen.len() != 3 {
        return Err(format!(
            "scores line must cover all three {} categories, found {}",
            C::DIMENSION,
            seen.len()
        ));
    }
    Ok(Scores::new([seen[&0], seen[&1], seen[&2]]))
}

fn validate_rule<C: Category>(rule: &Rule<C>) -> Result<(), RuleParseError> {
    if matches!(rule.condition, Pattern::Not(_)) {
        return Err(RuleParseError::NegatedRoot {
            rule: rule.id.clone(),
        });
    }
    // Number is decided after the referential property, so a refprop rule
    // reading a number category could never fire meaningfully.
    if C::DIMENSION == Dimension::RefProp && rule.condition.reads_number() {
        return Err(RuleParseError::ReadsNumber {
            rule: rule.id.clone(),
            dimension: C::DIMENSION,
        });
    }
    Ok(())
}

/// Canonical text form; `parse_rule_pack(serialize_rules(p)) == p`.
pub fn serialize_rules<C: Category>(pack: &RulePack<C>) -> String {
    let mut out = String::new();
    out.push_str("pack ");
    out.push_str(&C::DIMENSION.to_string());
    if let Some(name) = &pack.name {
        out.push_str(&format!(" \"{name}\""));
    }
    out.push_str(&format!(" v{} {{\n", pack.version));
    for rule in &pack.rules {
        out.push('\n');
        out.push_str(&format!("rule {}\n", rule.id));
        if let Some(note) = &rule.note {
            out.push_str(&format!("note: {note}\n"));
        }
        if rule.assigned_scores {
            out.push_str("score: assigned\n");
        }
        out.push_str("when:\n");
        out.push_str(&format!("  {}\n", rule.condition));
        out.push_str("scores:");
        for (c, s) in rule.scores.iter() {
            out.push_str(&format!(" {c} {s}"));
        }
        out.push('\n');
    }
    out.push_str("\n}\n");
    out
}

pub const STARTER_REFPROP: &str = include_str!("../rules/refprop.rules");
pub const STARTER_NUMBER: &str = include_str!("../rules/number.rules");

/// The shipped referential-property pack.
pub fn starter_refprop_pack() -> RulePack<RefProp> {
    parse_rule_pack::<RefProp>(STARTER_REFPROP).expect("shipped refprop pack parses")
}

/// The shipped number pack.
pub fn starter_number_pack() -> RulePack<NumberCat> {
    parse_rule_pack::<NumberCat>(STARTER_NUMBER).expect("shipped number pack parses")
}

/// One lint finding. `rule` names the offending rule of `dimension`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LintWarning {
    pub dimension: Dimension,
    pub rule: String,
    pub kind: LintKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LintKind {
    /// The rule never fired on any noun of the fixture documents.
    NeverFires,
    /// Every value is zero: the rule either adds nothing or vetoes
    /// everything.
    ZeroEffect,
    /// Another rule has a structurally identical condition.
    ShadowedBy(String),
}

impl fmt::Display for LintWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            LintKind::NeverFires => {
                write!(
                    f,
                    "{} rule {} never fires on the fixture corpus",
                    self.dimension, self.rule
                )
            }
            LintKind::ZeroEffect => {
                write!(
                    f,
                    "{} rule {} has all-zero values (dead weight or total veto)",
                    self.dimension, self.rule
                )
            }
            LintKind::ShadowedBy(other) => {
                write!(
                    f,
                    "{} rule {} duplicates the condition of {}",
                    self.dimension, self.rule, other
                )
            }
        }
    }
}

/// Lints one pack against fixture documents.
///
/// Firing is observed by running the full annotation pipeline, so rules
/// that read decided categories of the other dimension are exercised too;
/// `companion` supplies that other pack (rules of the pack under lint are
/// used for its own dimension). Documents are re-annotated from scratch.
pub fn lint_rules<C: Category>(
    pack: &RulePack<C>,
    companion: Option<&AnyRulePack>,
    fixtures: &[Document],
) -> Vec<LintWarning> {
    let mut warnings = Vec::new();
    for (i, rule) in pack.rules.iter().enumerate() {
        if rule.scores.iter().all(|(_, s)| s.value() == 0) {
            warnings.push(LintWarning {
                dimension: C::DIMENSION,
                rule: rule.id.clone(),
                kind: LintKind::ZeroEffect,
            });
        }
        let rendered = rule.condition.to_string();
        if let Some(prev) = pack.rules[..i]
            .iter()
            .find(|r| r.condition.to_string() == rendered)
        {
            warnings.push(LintWarning {
                dimension: C::DIMENSION,
                rule: rule.id.clone(),
                kind: LintKind::ShadowedBy(prev.id.clone()),
            });
        }
    }
    let fired = fired_ids::<C>(pack, companion, fixtures);
    for rule in &pack.rules {
        if !fired.contains(&rule.id) {
            warnings.push(LintWarning {
                dimension: C::DIMENSION,
                rule: rule.id.clone(),
                kind: LintKind::NeverFires,
            });
        }
    }
    warnings
}

fn fired_ids<C: Category>(
    pack: &RulePack<C>,
    companion: Option<&AnyRulePack>,
    fixtures: &[Document],
) -> std::collections::BTreeSet<String> {
    let empty_ref = RulePack::<RefProp>::empty();
    let empty_num = RulePack::<NumberCat>::empty();
    // `C` is statically one of the two category types.
    let any_pack = pack as &dyn std::any::Any;
    let own_ref = any_pack.downcast_ref::<RulePack<RefProp>>();
    let own_num = any_pack.downcast_ref::<RulePack<NumberCat>>();
    let mut refprop = own_ref.unwrap_or(&empty_ref);
    let mut number = own_num.unwrap_or(&empty_num);
    match companion {
        Some(AnyRulePack::RefProp(p)) if own_ref.is_none() => refprop = p,
        Some(AnyRulePack::Number(p)) if own_num.is_none() => number = p,
        _ => {}
    }
    let mut fired = std::collections::BTreeSet::new();
    for doc in fixtures {
        let mut doc = doc.clone();
        let trace = engine::annotate_document(&mut doc, refprop, number);
        for event in trace.fired_rule_ids() {
            fired.insert(event);
        }
    }
    fired
}
