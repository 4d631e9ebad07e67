//! Gold-annotation ingestion and the four-outcome evaluation tables.
//!
//! Every prediction lands in exactly one outcome: **correct** (equals the
//! primary gold), **reasonable** (wrong fine category but the right member
//! of the marked coarse class, e.g. an indefinite answer where the gold is
//! definite and the coarse split would do), **partially correct** (one of
//! the annotator's acceptable alternates), or **incorrect**. Nouns whose
//! gold is marked undecidable (`?`) are excluded from all four rows and
//! counted separately.
//!
//! The gold file is tab-separated, one record per noun:
//!
//! ```text
//! doc-id <TAB> sentence-id <TAB> noun-index <TAB> lemma <TAB> refprop <TAB> number
//! ```
//!
//! `noun-index` is the 1-based position in the sentence's decision order;
//! `lemma` is a consistency check against the tree. A gold field is
//! `primary(|acceptable)*(+coarse)?` — e.g. `generic|definite` or
//! `definite+non_generic` — or `?` for undecidable.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::tree::{Category, Document, NumberCat, RefProp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Correct,
    Reasonable,
    PartiallyCorrect,
    Incorrect,
}

impl Outcome {
    pub const ALL: [Outcome; 4] = [
        Outcome::Correct,
        Outcome::Reasonable,
        Outcome::PartiallyCorrect,
        Outcome::Incorrect,
    ];

    fn index(self) -> usize {
        Self::ALL.iter().position(|o| *o == self).unwrap()
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Correct => "correct",
            Outcome::Reasonable => "reasonable",
            Outcome::PartiallyCorrect => "partially correct",
            Outcome::Incorrect => "incorrect",
        }
    }
}

/// The annotator's primary answer: a fine category or "other".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GoldPrimary<C> {
    Cat(C),
    Other,
}

/// One gold judgement for one dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldLabel<C: Category> {
    pub primary: GoldPrimary<C>,
    /// Alternates the annotator also accepts; contains the primary when the
    /// primary is a fine category.
    pub acceptable: BTreeSet<C>,
    /// True when an answer in the dimension's merged coarse class
    /// (non-generic, countable) counts as reasonable.
    pub coarse: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GoldField<C: Category> {
    Undecidable,
    Label(GoldLabel<C>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldRecord {
    pub doc: String,
    pub sentence: String,
    pub index: usize,
    pub lemma: String,
    pub refprop: GoldField<RefProp>,
    pub number: GoldField<NumberCat>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoldFile {
    pub records: Vec<GoldRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("gold line {line}: {msg}")]
    Gold { line: usize, msg: String },
    #[error("gold alignment failed: {0}")]
    Alignment(AlignmentReport),
    #[error("noun {0} has no annotation; run annotation before evaluation")]
    Unannotated(String),
}

/// Mismatches between the gold file and the annotated corpus, by noun id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AlignmentReport {
    pub missing_gold: Vec<String>,
    pub extra_gold: Vec<String>,
    pub lemma_mismatches: Vec<String>,
}

impl AlignmentReport {
    fn is_empty(&self) -> bool {
        self.missing_gold.is_empty()
            && self.extra_gold.is_empty()
            && self.lemma_mismatches.is_empty()
    }
}

impl std::fmt::Display for AlignmentReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if !self.missing_gold.is_empty() {
            parts.push(format!("no gold for [{}]", self.missing_gold.join(", ")));
        }
        if !self.extra_gold.is_empty() {
            parts.push(format!(
                "gold without a noun for [{}]",
                self.extra_gold.join(", ")
            ));
        }
        if !self.lemma_mismatches.is_empty() {
            parts.push(format!(
                "lemma mismatch at [{}]",
                self.lemma_mismatches.join(", ")
            ));
        }
        f.write_str(&parts.join("; "))
    }
}

fn parse_gold_field<C: Category>(text: &str, line: usize) -> Result<GoldField<C>, EvalError> {
    let fail = |msg: String| EvalError::Gold { line, msg };
    let text = text.trim();
    if text == "?" {
        return Ok(GoldField::Undecidable);
    }
    let (cats, coarse) = match text.split_once('+') {
        Some((cats, coarse_name)) => {
            if coarse_name != C::COARSE_NAME {
                return Err(fail(format!(
                    "unknown coarse class `{coarse_name}` for {} (expected `{}`)",
                    C::DIMENSION,
                    C::COARSE_NAME
                )));
            }
            (cats, true)
        }
        None => (text, false),
    };
    let mut primary = None;
    let mut acceptable = BTreeSet::new();
    for (i, tok) in cats.split('|').enumerate() {
        let tok = tok.trim();
        if tok == "other" {
            if i == 0 {
                primary = Some(GoldPrimary::Other);
                continue;
            }
            return Err(fail("`other` may only be the primary".into()));
        }
        let cat: C = tok
            .parse()
            .map_err(|_| fail(format!("unknown {} category `{tok}`", C::DIMENSION)))?;
        if i == 0 {
            primary = Some(GoldPrimary::Cat(cat));
        }
        acceptable.insert(cat);
    }
    let primary = primary.ok_or_else(|| fail("empty gold field".into()))?;
    if matches!(primary, GoldPrimary::Other) && acceptable.is_empty() && !coarse {
        // plain `other`: nothing else to record
    }
    Ok(GoldField::Label(GoldLabel {
        primary,
        acceptable,
        coarse,
    }))
}

/// Parses a gold file. `#` lines are comments.
pub fn parse_gold(text: &str) -> Result<GoldFile, EvalError> {
    let mut records = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 6 {
            return Err(EvalError::Gold {
                line: i + 1,
                msg: format!("expected 6 tab-separated columns, found {}", cols.len()),
            });
        }
        records.push(GoldRecord {
            doc: cols[0].to_string(),
            sentence: cols[1].to_string(),
            index: cols[2].parse().map_err(|_| EvalError::Gold {
                line: i + 1,
                msg: format!("bad noun index `{}`", cols[2]),
            })?,
            lemma: cols[3].to_string(),
            refprop: parse_gold_field::<RefProp>(cols[4], i + 1)?,
            number: parse_gold_field::<NumberCat>(cols[5], i + 1)?,
        });
    }
    Ok(GoldFile { records })
}

/// Builds a gold file that accepts exactly the documents' own annotations.
pub fn gold_from_documents(docs: &[Document]) -> GoldFile {
    let mut records = Vec::new();
    for doc in docs {
        for sentence in &doc.sentences {
            for (ni, id) in sentence.nouns_in_order().into_iter().enumerate() {
                let node = sentence.node(id);
                let refprop = match node.refprop {
                    Some(c) => GoldField::Label(GoldLabel {
                        primary: GoldPrimary::Cat(c),
                        acceptable: BTreeSet::from([c]),
                        coarse: false,
                    }),
                    None => GoldField::Undecidable,
                };
                let number = match node.number {
                    Some(c) => GoldField::Label(GoldLabel {
                        primary: GoldPrimary::Cat(c),
                        acceptable: BTreeSet::from([c]),
                        coarse: false,
                    }),
                    None => GoldField::Undecidable,
                };
                records.push(GoldRecord {
                    doc: doc.id.clone(),
                    sentence: sentence.id.clone(),
                    index: ni + 1,
                    lemma: node.head().lemma.clone(),
                    refprop,
                    number,
                });
            }
        }
    }
    GoldFile { records }
}

pub fn serialize_gold(gold: &GoldFile) -> String {
    fn field<C: Category>(f: &GoldField<C>) -> String {
        match f {
            GoldField::Undecidable => "?".to_string(),
            GoldField::Label(label) => {
                let mut parts = Vec::new();
                match label.primary {
                    GoldPrimary::Cat(c) => {
                        parts.push(c.to_string());
                        for alt in &label.acceptable {
                            if GoldPrimary::Cat(*alt) != label.primary {
                                parts.push(alt.to_string());
                            }
                        }
                    }
                    GoldPrimary::Other => {
                        parts.push("other".to_string());
                        for alt in &label.acceptable {
                            parts.push(alt.to_string());
                        }
                    }
                }
                let mut out = parts.join("|");
                if label.coarse {
                    out.push('+');
                    out.push_str(C::COARSE_NAME);
                }
                out
            }
        }
    }
    let mut out = String::from("# doc\tsentence\tindex\tlemma\trefprop\tnumber\n");
    for r in &gold.records {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            r.doc,
            r.sentence,
            r.index,
            r.lemma,
            field(&r.refprop),
            field(&r.number)
        ));
    }
    out
}

/// Classifies one prediction against one gold judgement.
pub fn classify<C: Category>(prediction: C, gold: &GoldLabel<C>) -> Outcome {
    if gold.primary == GoldPrimary::Cat(prediction) {
        return Outcome::Correct;
    }
    if gold.coarse && prediction.in_merged_coarse() {
        let primary_compatible = match gold.primary {
            GoldPrimary::Cat(p) => p.in_merged_coarse(),
            GoldPrimary::Other => true,
        };
        if primary_compatible {
            return Outcome::Reasonable;
        }
    }
    if gold.acceptable.contains(&prediction) {
        return Outcome::PartiallyCorrect;
    }
    Outcome::Incorrect
}

/// Outcome counts per gold column (the three fine categories plus "other"),
/// for one dimension.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreTable<C: Category> {
    /// `counts[outcome][column]`; column 3 is "other".
    counts: [[u32; 4]; 4],
    pub undecidable: u32,
    _marker: std::marker::PhantomData<C>,
}

impl<C: Category> Default for ScoreTable<C> {
    fn default() -> Self {
        ScoreTable {
            counts: [[0; 4]; 4],
            undecidable: 0,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<C: Category> ScoreTable<C> {
    pub fn new() -> Self {
        Self::default()
    }

    /// A table from raw outcome counts, rows in [`Outcome::ALL`] order,
    /// columns in `C::ALL` order plus "other".
    pub fn from_counts(counts: [[u32; 4]; 4]) -> Self {
        ScoreTable {
            counts,
            undecidable: 0,
            _marker: std::marker::PhantomData,
        }
    }

    pub fn record(&mut self, gold_primary: GoldPrimary<C>, outcome: Outcome) {
        let col = match gold_primary {
            GoldPrimary::Cat(c) => c.index(),
            GoldPrimary::Other => 3,
        };
        self.counts[outcome.index()][col] += 1;
    }

    pub fn count(&self, outcome: Outcome, column: usize) -> u32 {
        self.counts[outcome.index()][column]
    }

    /// Total gold count of one column.
    pub fn column_total(&self, column: usize) -> u32 {
        Outcome::ALL
            .iter()
            .map(|o| self.counts[o.index()][column])
            .sum()
    }

    pub fn grand_total(&self) -> u32 {
        (0..4).map(|c| self.column_total(c)).sum()
    }

    pub fn row_total(&self, outcome: Outcome) -> u32 {
        (0..4).map(|c| self.counts[outcome.index()][c]).sum()
    }

    /// `correct / column total × 100`, one decimal; `None` on an empty column.
    pub fn pct_correct(&self, column: usize) -> Option<f64> {
        let total = self.column_total(column);
        (total > 0)
            .then(|| round1(self.count(Outcome::Correct, column) as f64 / total as f64 * 100.0))
    }

    pub fn pct_correct_total(&self) -> Option<f64> {
        let total = self.grand_total();
        (total > 0).then(|| round1(self.row_total(Outcome::Correct) as f64 / total as f64 * 100.0))
    }

    pub fn pct_appearance(&self, column: usize) -> Option<f64> {
        let total = self.grand_total();
        (total > 0).then(|| round1(self.column_total(column) as f64 / total as f64 * 100.0))
    }
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// Evaluates annotated documents against a gold file; returns the two
/// tables (referential property, number).
pub fn evaluate(
    docs: &[Document],
    gold: &GoldFile,
) -> Result<(ScoreTable<RefProp>, ScoreTable<NumberCat>), EvalError> {
    let mut by_key: BTreeMap<(String, String, usize), &GoldRecord> = BTreeMap::new();
    for r in &gold.records {
        by_key.insert((r.doc.clone(), r.sentence.clone(), r.index), r);
    }
    let mut report = AlignmentReport::default();
    let mut matched: BTreeSet<(String, String, usize)> = BTreeSet::new();
    let mut pairs: Vec<(&GoldRecord, RefProp, NumberCat)> = Vec::new();
    for doc in docs {
        for sentence in &doc.sentences {
            for (ni, id) in sentence.nouns_in_order().into_iter().enumerate() {
                let node = sentence.node(id);
                let key = (doc.id.clone(), sentence.id.clone(), ni + 1);
                let noun_id = format!("{}/{}/{}", key.0, key.1, key.2);
                let Some(record) = by_key.get(&key) else {
                    report.missing_gold.push(noun_id);
                    continue;
                };
                matched.insert(key);
                if record.lemma != node.head().lemma {
                    report.lemma_mismatches.push(format!(
                        "{noun_id} (gold `{}', tree `{}')",
                        record.lemma,
                        node.head().lemma
                    ));
                    continue;
                }
                let (Some(rp), Some(num)) = (node.refprop, node.number) else {
                    return Err(EvalError::Unannotated(noun_id));
                };
                pairs.push((record, rp, num));
            }
        }
    }
    for r in &gold.records {
        let key = (r.doc.clone(), r.sentence.clone(), r.index);
        if !matched.contains(&key) {
            report
                .extra_gold
                .push(format!("{}/{}/{}", r.doc, r.sentence, r.index));
        }
    }
    if !report.is_empty() {
        return Err(EvalError::Alignment(report));
    }
    let mut refprop_table = ScoreTable::<RefProp>::new();
    let mut number_table = ScoreTable::<NumberCat>::new();
    for (record, rp, num) in pairs {
        match &record.refprop {
            GoldField::Undecidable => refprop_table.undecidable += 1,
            GoldField::Label(label) => refprop_table.record(label.primary, classify(rp, label)),
        }
        match &record.number {
            GoldField::Undecidable => number_table.undecidable += 1,
            GoldField::Label(label) => number_table.record(label.primary, classify(num, label)),
        }
    }
    Ok((refprop_table, number_table))
}

const DASHES: &str = "-----";

fn fmt_pct(p: Option<f64>) -> String {
    match p {
        Some(v) => format!("{v:.1}"),
        None => DASHES.to_string(),
    }
}

/// Fixed-width text rendering in the published row/column layout.
pub fn render_table<C: Category>(table: &ScoreTable<C>, title: &str) -> String {
    let mut out = String::new();
    let headers: Vec<String> = C::ALL
        .iter()
        .map(|c| c.to_string())
        .chain(["other".to_string(), "total".to_string()])
        .collect();
    let _ = writeln!(out, "{title}");
    let _ = write!(out, "{:<18}", "value");
    for h in &headers {
        let _ = write!(out, "{h:>13}");
    }
    out.push('\n');
    for outcome in Outcome::ALL {
        let _ = write!(out, "{:<18}", outcome.label());
        for col in 0..4 {
            let _ = write!(out, "{:>13}", table.count(outcome, col));
        }
        let _ = write!(out, "{:>13}", table.row_total(outcome));
        out.push('\n');
    }
    let _ = write!(out, "{:<18}", "% of correct");
    for col in 0..4 {
        let _ = write!(out, "{:>13}", fmt_pct(table.pct_correct(col)));
    }
    let _ = write!(out, "{:>13}", fmt_pct(table.pct_correct_total()));
    out.push('\n');
    let _ = write!(out, "{:<18}", "% of appearance");
    for col in 0..4 {
        let _ = write!(out, "{:>13}", fmt_pct(table.pct_appearance(col)));
    }
    let _ = write!(
        out,
        "{:>13}",
        fmt_pct((table.grand_total() > 0).then_some(100.0))
    );
    out.push('\n');
    if table.undecidable > 0 {
        let _ = writeln!(out, "undecidable (excluded): {}", table.undecidable);
    }
    out
}

/// Machine-readable rendering: one row per gold column, tab-separated.
pub fn to_delimited<C: Category>(table: &ScoreTable<C>) -> String {
    let mut out = String::from(
        "dimension\tgold\tcorrect\treasonable\tpartially_correct\tincorrect\tpct_correct\tpct_appearance\n",
    );
    let labels: Vec<String> = C::ALL
        .iter()
        .map(|c| c.to_string())
        .chain(["other".to_string()])
        .collect();
    for (col, label) in labels.iter().enumerate() {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            C::DIMENSION,
            label,
            table.count(Outcome::Correct, col),
            table.count(Outcome::Reasonable, col),
            table.count(Outcome::PartiallyCorrect, col),
            table.count(Outcome::Incorrect, col),
            fmt_pct(table.pct_correct(col)),
            fmt_pct(table.pct_appearance(col)),
        );
    }
    let _ = writeln!(
        out,
        "{}\ttotal\t{}\t{}\t{}\t{}\t{}\t{}",
        C::DIMENSION,
        table.row_total(Outcome::Correct),
        table.row_total(Outcome::Reasonable),
        table.row_total(Outcome::PartiallyCorrect),
        table.row_total(Outcome::Incorrect),
        fmt_pct(table.pct_correct_total()),
        if table.grand_total() > 0 {
            "100.0".to_string()
        } else {
            DASHES.to_string()
        },
    );
    out
}

/// Re-reads [`to_delimited`] output; the inverse of the count cells.
pub fn parse_delimited<C: Category>(text: &str) -> Result<ScoreTable<C>, EvalError> {
    let mut counts = [[0u32; 4]; 4];
    for (i, line) in text.lines().enumerate().skip(1) {
        let fail = |msg: &str| EvalError::Gold {
            line: i + 1,
            msg: msg.to_string(),
        };
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 8 {
            return Err(fail("expected 8 columns"));
        }
        if cols[1] == "total" {
            continue;
        }
        let col = C::ALL
            .iter()
            .position(|c| c.to_string() == cols[1])
            .or_else(|| (cols[1] == "other").then_some(3))
            .ok_or_else(|| fail("unknown gold column"))?;
        for (row, tok) in cols[2..6].iter().enumerate() {
            counts[row][col] = tok.parse().map_err(|_| fail("bad count"))?;
        }
    }
    Ok(ScoreTable::from_counts(counts))
}
