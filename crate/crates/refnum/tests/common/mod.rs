//! Shared fixtures, generators and independent reference implementations
//! for the integration suites.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::prelude::*;
use rand::rngs::StdRng;

use refnum::engine::DiscourseContext;
use refnum::eval::{parse_gold, GoldFile};
use refnum::pattern::{
    Cmp, FieldItem, FieldPattern, MorphItem, MorphemeTemplate, NodeTemplate, Pattern,
};
use refnum::tree::{
    parse_document, Document, Morpheme, NodeId, NumberCat, RawNode, RefProp, Sentence,
};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn load_corpus() -> Vec<Document> {
    let dir = fixture_dir().join("corpus");
    let manifest = std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
    let mut docs = Vec::new();
    for line in manifest.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let path = dir.join(line);
        let text = std::fs::read_to_string(&path).unwrap();
        let id = path.file_stem().unwrap().to_string_lossy().into_owned();
        docs.push(parse_document(&text, &id).unwrap());
    }
    docs
}

pub fn load_supplement() -> Vec<Document> {
    let dir = fixture_dir().join("supplement");
    let mut docs = Vec::new();
    let mut names: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "trees"))
        .collect();
    names.sort();
    for path in names {
        let text = std::fs::read_to_string(&path).unwrap();
        let id = path.file_stem().unwrap().to_string_lossy().into_owned();
        docs.push(parse_document(&text, &id).unwrap());
    }
    docs
}

pub fn load_gold() -> GoldFile {
    let text = std::fs::read_to_string(fixture_dir().join("corpus/gold.tsv")).unwrap();
    parse_gold(&text).unwrap()
}

/// Prints one `PASS`/`FAIL` line per acceptance criterion, even when the
/// body panics.
pub struct Criterion {
    name: &'static str,
    passed: bool,
}

impl Criterion {
    pub fn new(name: &'static str) -> Criterion {
        Criterion {
            name,
            passed: false,
        }
    }

    pub fn pass(mut self) {
        self.passed = true;
        println!("acceptance: {} ... PASS", self.name);
    }

    pub fn pass_with(mut self, detail: &str) {
        self.passed = true;
        println!("acceptance: {} ... PASS ({detail})", self.name);
    }
}

impl Drop for Criterion {
    fn drop(&mut self) {
        if !self.passed {
            println!("acceptance: {} ... FAIL", self.name);
        }
    }
}

const POS: [&str; 6] = [
    "noun",
    "verb",
    "adjective",
    "postpositional-particle",
    "numeral",
    "adverb",
];
const SUBPOS: [&str; 5] = [
    "_",
    "common-noun",
    "numeral",
    "case-marking-postposition",
    "topic-marking-postposition",
];
const CONJ_TYPE: [&str; 3] = ["_", "consonant-verb", "copula"];
const CONJ_FORM: [&str; 4] = [
    "_",
    "basic-form",
    "TA-line-past-form",
    "MASU-line-basic-form",
];
const LEMMA: [&str; 13] = [
    "INU", "NEKO", "HON", "KARE", "WA", "GA", "NO", "TABERU", "SONO", "1", "2", "3", "。",
];

fn pick<'a>(rng: &mut StdRng, options: &[&'a str]) -> &'a str {
    options[rng.random_range(0..options.len())]
}

pub fn random_morpheme(rng: &mut StdRng) -> Morpheme {
    Morpheme {
        pos: pick(rng, &POS).to_string(),
        subpos: pick(rng, &SUBPOS).to_string(),
        conj_type: pick(rng, &CONJ_TYPE).to_string(),
        conj_form: pick(rng, &CONJ_FORM).to_string(),
        lemma: pick(rng, &LEMMA).to_string(),
        surface: pick(rng, &LEMMA).to_string(),
    }
}

/// A random sentence of up to `max_nodes` phrase nodes, with random
/// annotations on noun nodes and, half of the time, a random surface-index
/// permutation.
pub fn random_sentence(rng: &mut StdRng, max_nodes: usize) -> Sentence {
    let n = rng.random_range(1..=max_nodes);
    let mut children_of: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 1..n {
        let parent = rng.random_range(0..i);
        children_of[parent].push(i);
    }
    fn build(i: usize, children_of: &[Vec<usize>], rng: &mut StdRng) -> RawNode {
        let morphemes: Vec<Morpheme> = (0..rng.random_range(1..=3))
            .map(|_| random_morpheme(rng))
            .collect();
        let (refprop, number) = if morphemes[0].pos == "noun" {
            match rng.random_range(0..5) {
                0 => (Some(random_refprop(rng)), None),
                1 | 2 => {
                    let rp = random_refprop(rng);
                    (Some(rp), Some(random_number(rng)))
                }
                _ => (None, None),
            }
        } else {
            (None, None)
        };
        RawNode {
            morphemes,
            children: children_of[i]
                .iter()
                .map(|&c| build(c, children_of, rng))
                .collect(),
            surface_index: None,
            refprop,
            number,
        }
    }
    let mut root = build(0, &children_of, rng);
    if rng.random_bool(0.5) {
        let mut perm: Vec<u32> = (1..=n as u32).collect();
        perm.shuffle(rng);
        let mut next = 0usize;
        fn assign(node: &mut RawNode, perm: &[u32], next: &mut usize) {
            node.surface_index = Some(perm[*next]);
            *next += 1;
            for child in &mut node.children {
                assign(child, perm, next);
            }
        }
        assign(&mut root, &perm, &mut next);
    }
    Sentence::from_parts("s1", root)
}

pub fn random_refprop(rng: &mut StdRng) -> RefProp {
    [RefProp::Indefinite, RefProp::Definite, RefProp::Generic][rng.random_range(0..3)]
}

pub fn random_number(rng: &mut StdRng) -> NumberCat {
    [
        NumberCat::Singular,
        NumberCat::Plural,
        NumberCat::Uncountable,
    ][rng.random_range(0..3)]
}

fn random_node(rng: &mut StdRng, s: &Sentence) -> NodeId {
    let ids: Vec<NodeId> = s.node_ids().collect();
    ids[rng.random_range(0..ids.len())]
}

/// A template loosely derived from one node of the sentence: some fields
/// kept literal, some wildcarded, occasionally perturbed so that both
/// matching and non-matching templates appear.
fn derived_template(rng: &mut StdRng, s: &Sentence, depth: usize) -> Pattern {
    let node = random_node(rng, s);
    let phrase = s.node(node);
    let mut morphemes: Vec<MorphItem> = Vec::new();
    for m in &phrase.morphemes {
        if rng.random_bool(0.3) {
            morphemes.push(MorphItem::Gap);
            continue;
        }
        let mut items = Vec::new();
        for field in m.fields() {
            match rng.random_range(0..10) {
                0..=4 => items.push(FieldItem::Pat(FieldPattern::Any)),
                5..=7 => items.push(FieldItem::Pat(FieldPattern::Literal(field.to_string()))),
                8 => items.push(FieldItem::Gap),
                _ => items.push(FieldItem::Pat(FieldPattern::Literal(format!(
                    "not-{field}"
                )))),
            }
        }
        morphemes.push(MorphItem::Template(MorphemeTemplate { items }));
    }
    if morphemes.is_empty() || rng.random_bool(0.5) {
        morphemes.push(MorphItem::Gap);
    }
    let mut children = Vec::new();
    if depth < 2 {
        for _ in 0..phrase.children().len().min(2) {
            if rng.random_bool(0.4) {
                children.push(derived_template(rng, s, depth + 1));
            }
        }
    }
    let allow_extra = rng.random_bool(0.8) || children.len() < phrase.children().len();
    Pattern::Template(NodeTemplate {
        morphemes,
        children,
        allow_extra,
    })
}

fn binder_free(rng: &mut StdRng, s: &Sentence, depth: usize) -> Pattern {
    match rng.random_range(0..10) {
        0..=5 => derived_template(rng, s, depth),
        6 => Pattern::AnySubtree,
        7 => Pattern::RefPropIs(random_refprop(rng)),
        8 => Pattern::NumberIs(random_number(rng)),
        _ => Pattern::SeenBefore,
    }
}

/// A random pattern of depth at most 2, in the fragment where numeral
/// binders appear only as direct conjuncts of a top-level `and` (the shape
/// rule conditions take).
pub fn random_pattern(rng: &mut StdRng, s: &Sentence) -> Pattern {
    match rng.random_range(0..100) {
        0..=34 => derived_template(rng, s, 1),
        35..=44 => Pattern::AnySubtree,
        45..=54 => Pattern::And(vec![binder_free(rng, s, 1), binder_free(rng, s, 1)]),
        55..=64 => Pattern::Or(vec![binder_free(rng, s, 1), binder_free(rng, s, 1)]),
        65..=74 => Pattern::Not(Box::new(binder_free(rng, s, 1))),
        75..=82 => Pattern::Modee(Box::new(binder_free(rng, s, 1))),
        83..=87 => Pattern::ModeeStar(Box::new(binder_free(rng, s, 1))),
        88..=93 => binder_free(rng, s, 1),
        _ => {
            // Numeral binder on the lemma slot plus a guard.
            let template = Pattern::Template(NodeTemplate {
                morphemes: vec![
                    MorphItem::Template(MorphemeTemplate {
                        items: vec![
                            FieldItem::Pat(FieldPattern::Any),
                            FieldItem::Pat(FieldPattern::Any),
                            FieldItem::Pat(FieldPattern::Any),
                            FieldItem::Pat(FieldPattern::Any),
                            FieldItem::Pat(FieldPattern::NumBind("x".to_string())),
                            FieldItem::Gap,
                        ],
                    }),
                    MorphItem::Gap,
                ],
                children: Vec::new(),
                allow_extra: true,
            });
            let cmp = [Cmp::Eq, Cmp::Ge, Cmp::Le][rng.random_range(0..3)];
            let value = rng.random_range(1..=3);
            Pattern::And(vec![
                template,
                Pattern::NumGuard {
                    binder: "x".to_string(),
                    cmp,
                    value,
                },
            ])
        }
    }
}

/// Independent reference implementations, deliberately structured unlike
/// the production code: boolean satisfaction with a guessed total binder
/// assignment, dynamic-programming sequence alignment, and exhaustive
/// child-injection search.
pub mod oracle {
    use super::*;
    use refnum::pattern::parse_numeral;

    type Assignment = BTreeMap<String, i64>;

    pub fn matches(p: &Pattern, s: &Sentence, node: NodeId, disc: &DiscourseContext) -> bool {
        let binders = collect_binders(p);
        if binders.is_empty() {
            return sat(p, s, node, disc, &Assignment::new());
        }
        // A binder can only take values some field of the sentence yields.
        let mut candidates: Vec<i64> = Vec::new();
        for id in s.node_ids() {
            for m in &s.node(id).morphemes {
                for f in m.fields() {
                    if let Some(v) = parse_numeral(f) {
                        candidates.push(v);
                    }
                }
            }
        }
        candidates.sort_unstable();
        candidates.dedup();
        if candidates.is_empty() {
            return false;
        }
        let mut assignment = Assignment::new();
        try_assign(&binders, 0, &candidates, &mut assignment, &mut |asg| {
            sat(p, s, node, disc, asg)
        })
    }

    fn try_assign(
        binders: &[String],
        i: usize,
        candidates: &[i64],
        assignment: &mut Assignment,
        check: &mut impl FnMut(&Assignment) -> bool,
    ) -> bool {
        if i == binders.len() {
            return check(assignment);
        }
        for &v in candidates {
            assignment.insert(binders[i].clone(), v);
            if try_assign(binders, i + 1, candidates, assignment, check) {
                return true;
            }
        }
        assignment.remove(&binders[i]);
        false
    }

    fn collect_binders(p: &Pattern) -> Vec<String> {
        let mut out = p.binders();
        out.extend(p.guards());
        out.sort();
        out.dedup();
        out
    }

    fn sat(
        p: &Pattern,
        s: &Sentence,
        node: NodeId,
        disc: &DiscourseContext,
        asg: &Assignment,
    ) -> bool {
        match p {
            Pattern::AnySubtree => true,
            Pattern::Template(t) => sat_template(t, s, node, disc, asg),
            Pattern::And(ps) => ps.iter().all(|q| sat(q, s, node, disc, asg)),
            Pattern::Or(ps) => ps.iter().any(|q| sat(q, s, node, disc, asg)),
            Pattern::Not(q) => !sat(q, s, node, disc, asg),
            Pattern::Modee(q) => match s.node(node).parent() {
                Some(parent) => sat(q, s, parent, disc, asg),
                None => false,
            },
            Pattern::ModeeStar(q) => {
                let mut cursor = s.node(node).parent();
                while let Some(a) = cursor {
                    if sat(q, s, a, disc, asg) {
                        return true;
                    }
                    cursor = s.node(a).parent();
                }
                false
            }
            Pattern::NumGuard { binder, cmp, value } => match asg.get(binder) {
                Some(v) => match cmp {
                    Cmp::Eq => v == value,
                    Cmp::Ge => v >= value,
                    Cmp::Le => v <= value,
                },
                None => false,
            },
            Pattern::RefPropIs(c) => s.node(node).refprop == Some(*c),
            Pattern::NumberIs(c) => s.node(node).number == Some(*c),
            Pattern::SeenBefore => disc.seen_before(&s.node(node).head().lemma),
        }
    }

    fn sat_template(
        t: &NodeTemplate,
        s: &Sentence,
        node: NodeId,
        disc: &DiscourseContext,
        asg: &Assignment,
    ) -> bool {
        let phrase = s.node(node);
        if !morphs_dp(&t.morphemes, &phrase.morphemes, asg) {
            return false;
        }
        let kids = phrase.children();
        if !t.allow_extra && t.children.len() != kids.len() {
            return false;
        }
        if t.children.len() > kids.len() {
            return false;
        }
        let mut used = vec![false; kids.len()];
        inject(&t.children, kids, &mut used, s, disc, asg)
    }

    fn inject(
        templates: &[Pattern],
        kids: &[NodeId],
        used: &mut [bool],
        s: &Sentence,
        disc: &DiscourseContext,
        asg: &Assignment,
    ) -> bool {
        let Some((first, rest)) = templates.split_first() else {
            return true;
        };
        for (i, &kid) in kids.iter().enumerate() {
            if used[i] || !sat(first, s, kid, disc, asg) {
                continue;
            }
            used[i] = true;
            if inject(rest, kids, used, s, disc, asg) {
                used[i] = false;
                return true;
            }
            used[i] = false;
        }
        false
    }

    fn morphs_dp(items: &[MorphItem], seq: &[Morpheme], asg: &Assignment) -> bool {
        let (n, m) = (items.len(), seq.len());
        let mut dp = vec![vec![false; m + 1]; n + 1];
        dp[n][m] = true;
        for i in (0..n).rev() {
            for j in (0..=m).rev() {
                dp[i][j] = match &items[i] {
                    MorphItem::Gap => (j..=m).any(|k| dp[i + 1][k]),
                    MorphItem::Template(mt) => {
                        j < m && fields_dp(&mt.items, &seq[j].fields(), asg) && dp[i + 1][j + 1]
                    }
                };
            }
        }
        dp[0][0]
    }

    fn fields_dp(items: &[FieldItem], fields: &[&str], asg: &Assignment) -> bool {
        let (n, m) = (items.len(), fields.len());
        let mut dp = vec![vec![false; m + 1]; n + 1];
        dp[n][m] = true;
        for i in (0..n).rev() {
            for j in (0..=m).rev() {
                dp[i][j] = match &items[i] {
                    FieldItem::Gap => (j..=m).any(|k| dp[i + 1][k]),
                    FieldItem::Pat(p) => j < m && field_ok(p, fields[j], asg) && dp[i + 1][j + 1],
                };
            }
        }
        dp[0][0]
    }

    fn field_ok(p: &FieldPattern, field: &str, asg: &Assignment) -> bool {
        match p {
            FieldPattern::Any => true,
            FieldPattern::Literal(want) => field == want,
            FieldPattern::Regex(re) => re.is_match(field),
            FieldPattern::NumBind(name) => {
                matches!((parse_numeral(field), asg.get(name)), (Some(v), Some(w)) if v == *w)
            }
        }
    }

    /// Exhaustive reference for the category decision: rank the possible,
    /// positively scored categories by total then by fixed precedence; an
    /// empty ranking falls back to the default (index 0).
    pub fn decide(totals: [u32; 3], possible: [bool; 3]) -> (usize, bool) {
        let mut ranked: Vec<(u32, usize)> = (0..3)
            .filter(|&i| possible[i] && totals[i] > 0)
            .map(|i| (totals[i], i))
            .collect();
        ranked.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        match ranked.first() {
            Some(&(_, i)) => (i, false),
            None => (0, true),
        }
    }
}
