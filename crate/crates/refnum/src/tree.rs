//! Dependency-tree model and its bracketed text format.
//!
//! One sentence is one tree of phrase nodes (bunsetsu). Each node carries an
//! ordered morpheme list (head word plus attached particles) and the list of
//! nodes that modify it. The text format:
//!
//! ```text
//! Node     := "(" "<" Morpheme+ ">" ["#" index] Node* ")"
//! Morpheme := "[" pos subpos conj_type conj_form lemma surface
//!                 [refprop [number]] "]"
//! ```
//!
//! The six morpheme fields are whitespace-separated; `_` marks a blank
//! field; lemma and surface are quoted (`` `X' `` or `'X'`, both accepted on
//! input; serialization emits the backquote form). The optional seventh and
//! eighth fields hold a decided referential property and number and appear
//! only on the first morpheme of annotated noun nodes. The optional `#k`
//! after `>` records the phrase's 1-based position in the original sentence;
//! within one sentence indices are either absent everywhere or form a
//! permutation of `1..=N`.
//!
//! A document is a sequence of sentences in text order, written as
//! blank-line-separated blocks.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// The blank-field marker, stored verbatim so that files round-trip.
pub const BLANK: &str = "_";

/// Referential property of a noun phrase: how it denotes its subject.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RefProp {
    /// An arbitrary member of the class ("there are three dogs").
    Indefinite,
    /// A contextually unambiguous member ("the dog went away").
    Definite,
    /// The class itself or all of its members ("dogs are useful").
    Generic,
}

/// Grammatical number of a noun phrase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NumberCat {
    Singular,
    Plural,
    Uncountable,
}

/// The two decision dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dimension {
    RefProp,
    Number,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dimension::RefProp => "refprop",
            Dimension::Number => "number",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown category token `{0}`")]
pub struct ParseCategoryError(pub String);

/// Common surface of the two three-way category enums.
///
/// `ALL` fixes both the serialization order and the tie-break precedence of
/// [`crate::engine::decide`]; the first element is the dimension default.
/// Each dimension has exactly one two-member coarse class (non-generic,
/// countable); `in_merged_coarse` tests membership.
pub trait Category:
    Copy
    + Eq
    + Ord
    + std::hash::Hash
    + fmt::Debug
    + fmt::Display
    + FromStr<Err = ParseCategoryError>
    + Send
    + Sync
    + 'static
{
    const DIMENSION: Dimension;
    const ALL: [Self; 3];
    /// Name of the mergeable coarse class in gold files.
    const COARSE_NAME: &'static str;

    fn in_merged_coarse(self) -> bool;

    fn default_category() -> Self {
        Self::ALL[0]
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|c| *c == self).unwrap()
    }
}

impl fmt::Display for RefProp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RefProp::Indefinite => "indefinite",
            RefProp::Definite => "definite",
            RefProp::Generic => "generic",
        })
    }
}

impl FromStr for RefProp {
    type Err = ParseCategoryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "indefinite" => Ok(RefProp::Indefinite),
            "definite" => Ok(RefProp::Definite),
            "generic" => Ok(RefProp::Generic),
            _ => Err(ParseCategoryError(s.to_string())),
        }
    }
}

impl Category for RefProp {
    const DIMENSION: Dimension = Dimension::RefProp;
    const ALL: [Self; 3] = [RefProp::Indefinite, RefProp::Definite, RefProp::Generic];
    const COARSE_NAME: &'static str = "non_generic";

    fn in_merged_coarse(self) -> bool {
        matches!(self, RefProp::Indefinite | RefProp::Definite)
    }
}

impl fmt::Display for NumberCat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NumberCat::Singular => "singular",
            NumberCat::Plural => "plural",
            NumberCat::Uncountable => "uncountable",
        })
    }
}

impl FromStr for NumberCat {
    type Err = ParseCategoryError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "singular" => Ok(NumberCat::Singular),
            "plural" => Ok(NumberCat::Plural),
            "uncountable" => Ok(NumberCat::Uncountable),
            _ => Err(ParseCategoryError(s.to_string())),
        }
    }
}

impl Category for NumberCat {
    const DIMENSION: Dimension = Dimension::Number;
    const ALL: [Self; 3] = [
        NumberCat::Singular,
        NumberCat::Plural,
        NumberCat::Uncountable,
    ];
    const COARSE_NAME: &'static str = "countable";

    fn in_merged_coarse(self) -> bool {
        matches!(self, NumberCat::Singular | NumberCat::Plural)
    }
}

/// One lexical token: part of speech, sub-classification, conjugation type
/// and form, lemma, surface. Blank fields hold [`BLANK`]; `pos`, `lemma` and
/// `surface` are never blank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morpheme {
    pub pos: String,
    pub subpos: String,
    pub conj_type: String,
    pub conj_form: String,
    pub lemma: String,
    pub surface: String,
}

impl Morpheme {
    /// The six fields in text order, for positional matching.
    pub fn fields(&self) -> [&str; 6] {
        [
            &self.pos,
            &self.subpos,
            &self.conj_type,
            &self.conj_form,
            &self.lemma,
            &self.surface,
        ]
    }
}

/// Index of a phrase node inside its [`Sentence`] arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(pub(crate) usize);

/// One bunsetsu: a morpheme sequence plus the phrases modifying it.
///
/// `refprop`/`number` are the annotation slots written by the engine; they
/// are present only on noun nodes, and `number` is never present without
/// `refprop` (the text format cannot express that).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseNode {
    pub morphemes: Vec<Morpheme>,
    pub(crate) children: Vec<NodeId>,
    pub(crate) parent: Option<NodeId>,
    pub surface_index: Option<u32>,
    pub refprop: Option<RefProp>,
    pub number: Option<NumberCat>,
}

impl PhraseNode {
    /// The head morpheme (always present; morpheme lists are non-empty).
    pub fn head(&self) -> &Morpheme {
        &self.morphemes[0]
    }

    /// A node is a noun target iff its head morpheme's pos is `noun`.
    pub fn is_noun(&self) -> bool {
        self.head().pos == "noun"
    }

    pub fn children(&self) -> &[NodeId] {
        &self.children
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }
}

/// One sentence: an arena of phrase nodes rooted at the sentence predicate.
///
/// Trees are immutable after parsing except for the annotation slots, so a
/// parsed sentence can be shared read-only across threads; annotation is
/// done by a single writer per document.
#[derive(Debug, Clone)]
pub struct Sentence {
    pub id: String,
    nodes: Vec<PhraseNode>,
    root: NodeId,
}

impl Sentence {
    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &PhraseNode {
        &self.nodes[id.0]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// All node ids, in arena order (parent before its children).
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn set_refprop(&mut self, id: NodeId, value: RefProp) {
        self.nodes[id.0].refprop = Some(value);
    }

    pub fn set_number(&mut self, id: NodeId, value: NumberCat) {
        self.nodes[id.0].number = Some(value);
    }

    pub fn clear_annotations(&mut self) {
        for n in &mut self.nodes {
            n.refprop = None;
            n.number = None;
        }
    }

    /// Noun nodes in decision order.
    ///
    /// With surface indices this is ascending index (true left-to-right
    /// order). Without, it is a depth-first walk visiting children before
    /// their head, siblings in listed order — a deterministic stand-in,
    /// since the bracketed format lists modifiers in an arbitrary order.
    pub fn nouns_in_order(&self) -> Vec<NodeId> {
        let mut order: Vec<NodeId> = Vec::new();
        if self.nodes.iter().all(|n| n.surface_index.is_some()) {
            let mut ids: Vec<NodeId> = self.node_ids().collect();
            ids.sort_by_key(|id| self.node(*id).surface_index.unwrap());
            order = ids;
        } else {
            fn visit(s: &Sentence, id: NodeId, out: &mut Vec<NodeId>) {
                for &c in &s.node(id).children {
                    visit(s, c, out);
                }
                out.push(id);
            }
            visit(self, self.root, &mut order);
        }
        order
            .into_iter()
            .filter(|id| self.node(*id).is_noun())
            .collect()
    }

    /// Structural equality from the root: morphemes, surface indices,
    /// annotations, and child order, independent of arena layout and id.
    pub fn structurally_equal(&self, other: &Sentence) -> bool {
        fn eq(a: &Sentence, an: NodeId, b: &Sentence, bn: NodeId) -> bool {
            let (x, y) = (a.node(an), b.node(bn));
            x.morphemes == y.morphemes
                && x.surface_index == y.surface_index
                && x.refprop == y.refprop
                && x.number == y.number
                && x.children.len() == y.children.len()
                && x.children
                    .iter()
                    .zip(&y.children)
                    .all(|(&ca, &cb)| eq(a, ca, b, cb))
        }
        eq(self, self.root, other, other.root)
    }

    /// Builds a sentence from a nested structure; used by tests and
    /// generators. Children are attached in the given order.
    pub fn from_parts(id: &str, root: RawNode) -> Sentence {
        let mut nodes = Vec::new();
        fn add(nodes: &mut Vec<PhraseNode>, raw: RawNode, parent: Option<NodeId>) -> NodeId {
            let this = NodeId(nodes.len());
            nodes.push(PhraseNode {
                morphemes: raw.morphemes,
                children: Vec::new(),
                parent,
                surface_index: raw.surface_index,
                refprop: raw.refprop,
                number: raw.number,
            });
            for child in raw.children {
                let cid = add(nodes, child, Some(this));
                nodes[this.0].children.push(cid);
            }
            this
        }
        let root = add(&mut nodes, root, None);
        Sentence {
            id: id.to_string(),
            nodes,
            root,
        }
    }
}

/// Plain nested node used to construct sentences programmatically.
#[derive(Debug, Clone)]
pub struct RawNode {
    pub morphemes: Vec<Morpheme>,
    pub children: Vec<RawNode>,
    pub surface_index: Option<u32>,
    pub refprop: Option<RefProp>,
    pub number: Option<NumberCat>,
}

/// An ordered sequence of sentences sharing discourse state.
#[derive(Debug, Clone)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeParseError {
    #[error("syntax error at line {line}, column {col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("unknown annotation token `{token}` at line {line}, column {col}")]
    UnknownAnnotation {
        line: usize,
        col: usize,
        token: String,
    },
    #[error("bad surface indices in sentence {sentence}: {msg}")]
    BadSurfaceIndices { sentence: String, msg: String },
    #[error("annotation on non-noun node at line {line}, column {col}")]
    AnnotationOnNonNoun { line: usize, col: usize },
}

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
    src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            src,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn err(&self, msg: impl Into<String>) -> TreeParseError {
        TreeParseError::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), TreeParseError> {
        self.skip_ws();
        match self.peek() {
            Some(got) if got == c => {
                self.bump();
                Ok(())
            }
            Some(got) => Err(self.err(format!("expected `{c}`, found `{got}`"))),
            None => Err(self.err(format!("expected `{c}`, found end of input"))),
        }
    }

    /// A bare field token: everything up to whitespace or a bracket.
    fn bare_token(&mut self) -> Result<String, TreeParseError> {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c.is_whitespace()
                || matches!(c, '(' | ')' | '<' | '>' | '[' | ']' | '`' | '\'' | '#')
            {
                break;
            }
            out.push(c);
            self.bump();
        }
        if out.is_empty() {
            Err(self.err("expected a field token"))
        } else {
            Ok(out)
        }
    }

    /// Quoted string: opened by `` ` `` or `'`, closed by `'`. The content
    /// may not contain `'`.
    fn quoted(&mut self) -> Result<String, TreeParseError> {
        let open = self.bump().unwrap();
        debug_assert!(open == '`' || open == '\'');
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('\'') => return Ok(out),
                Some(c) => out.push(c),
                None => return Err(self.err("unterminated quoted string")),
            }
        }
    }
}

fn parse_morpheme(
    cur: &mut Cursor,
) -> Result<(Morpheme, Option<RefProp>, Option<NumberCat>), TreeParseError> {
    cur.expect('[')?;
    let mut fields: Vec<String> = Vec::new();
    let mut extra: Vec<(String, usize, usize)> = Vec::new();
    loop {
        cur.skip_ws();
        match cur.peek() {
            Some(']') => {
                cur.bump();
                break;
            }
            Some('`') | Some('\'') => {
                let (line, col) = (cur.line, cur.col);
                let s = cur.quoted()?;
                if fields.len() < 6 {
                    fields.push(s);
                } else {
                    extra.push((s, line, col));
                }
            }
            Some(_) => {
                let (line, col) = (cur.line, cur.col);
                let s = cur.bare_token()?;
                if fields.len() < 6 {
                    fields.push(s);
                } else {
                    extra.push((s, line, col));
                }
            }
            None => return Err(cur.err("unterminated morpheme record")),
        }
    }
    if fields.len() != 6 {
        return Err(cur.err(format!(
            "morpheme record has {} fields, expected 6",
            fields.len()
        )));
    }
    if extra.len() > 2 {
        return Err(cur.err("morpheme record has more than 8 fields"));
    }
    let mut it = fields.into_iter();
    let m = Morpheme {
        pos: it.next().unwrap(),
        subpos: it.next().unwrap(),
        conj_type: it.next().unwrap(),
        conj_form: it.next().unwrap(),
        lemma: it.next().unwrap(),
        surface: it.next().unwrap(),
    };
    for (f, name) in [
        (&m.pos, "pos"),
        (&m.lemma, "lemma"),
        (&m.surface, "surface"),
    ] {
        if f == BLANK {
            return Err(cur.err(format!("{name} field may not be blank")));
        }
    }
    let mut refprop = None;
    let mut number = None;
    if let Some((tok, line, col)) = extra.first() {
        refprop = Some(
            tok.parse::<RefProp>()
                .map_err(|_| TreeParseError::UnknownAnnotation {
                    line: *line,
                    col: *col,
                    token: tok.clone(),
                })?,
        );
    }
    if let Some((tok, line, col)) = extra.get(1) {
        number = Some(
            tok.parse::<NumberCat>()
                .map_err(|_| TreeParseError::UnknownAnnotation {
                    line: *line,
                    col: *col,
                    token: tok.clone(),
                })?,
        );
    }
    Ok((m, refprop, number))
}

fn parse_node(
    cur: &mut Cursor,
    nodes: &mut Vec<PhraseNode>,
    parent: Option<NodeId>,
) -> Result<NodeId, TreeParseError> {
    cur.expect('(')?;
    let (open_line, open_col) = (cur.line, cur.col);
    cur.expect('<')?;
    let mut morphemes = Vec::new();
    let mut refprop = None;
    let mut number = None;
    loop {
        cur.skip_ws();
        match cur.peek() {
            Some('[') => {
                let (m, rp, nm) = parse_morpheme(cur)?;
                if morphemes.is_empty() {
                    refprop = rp;
                    number = nm;
                } else if rp.is_some() || nm.is_some() {
                    return Err(cur.err("annotation fields are only allowed on the head morpheme"));
                }
                morphemes.push(m);
            }
            Some('>') => {
                cur.bump();
                break;
            }
            _ => return Err(cur.err("expected `[` or `>` in morpheme list")),
        }
    }
    if morphemes.is_empty() {
        return Err(cur.err("phrase node has no morphemes"));
    }
    if (refprop.is_some() || number.is_some()) && morphemes[0].pos != "noun" {
        return Err(TreeParseError::AnnotationOnNonNoun {
            line: open_line,
            col: open_col,
        });
    }
    cur.skip_ws();
    let mut surface_index = None;
    if cur.peek() == Some('#') {
        cur.bump();
        let mut digits = String::new();
        while matches!(cur.peek(), Some(c) if c.is_ascii_digit()) {
            digits.push(cur.bump().unwrap());
        }
        if digits.is_empty() {
            return Err(cur.err("expected digits after `#`"));
        }
        surface_index = Some(
            digits
                .parse::<u32>()
                .map_err(|_| cur.err("surface index out of range"))?,
        );
    }
    let id = NodeId(nodes.len());
    nodes.push(PhraseNode {
        morphemes,
        children: Vec::new(),
        parent,
        surface_index,
        refprop,
        number,
    });
    loop {
        cur.skip_ws();
        match cur.peek() {
            Some('(') => {
                let child = parse_node(cur, nodes, Some(id))?;
                nodes[id.0].children.push(child);
            }
            Some(')') => {
                cur.bump();
                break;
            }
            Some(c) => return Err(cur.err(format!("expected `(` or `)`, found `{c}`"))),
            None => return Err(cur.err("unterminated phrase node")),
        }
    }
    Ok(id)
}

fn validate_indices(s: &Sentence) -> Result<(), TreeParseError> {
    let with: usize = s
        .node_ids()
        .filter(|&id| s.node(id).surface_index.is_some())
        .count();
    let total = s.node_count();
    if with == 0 {
        return Ok(());
    }
    let fail = |msg: String| TreeParseError::BadSurfaceIndices {
        sentence: s.id.clone(),
        msg,
    };
    if with != total {
        return Err(fail(format!(
            "{with} of {total} nodes carry a surface index"
        )));
    }
    let mut seen = vec![false; total];
    for id in s.node_ids() {
        let k = s.node(id).surface_index.unwrap() as usize;
        if k == 0 || k > total {
            return Err(fail(format!("index {k} outside 1..={total}")));
        }
        if seen[k - 1] {
            return Err(fail(format!("duplicate index {k}")));
        }
        seen[k - 1] = true;
    }
    Ok(())
}

/// Parses one sentence. The id defaults to `s1`; [`parse_document`] assigns
/// positional ids.
pub fn parse_tree(text: &str) -> Result<Sentence, TreeParseError> {
    parse_tree_with_id(text, "s1")
}

pub fn parse_tree_with_id(text: &str, id: &str) -> Result<Sentence, TreeParseError> {
    let mut cur = Cursor::new(text);
    let mut nodes = Vec::new();
    let root = parse_node(&mut cur, &mut nodes, None)?;
    cur.skip_ws();
    if cur.peek().is_some() {
        return Err(cur.err("trailing input after sentence"));
    }
    let _ = cur.src;
    let sentence = Sentence {
        id: id.to_string(),
        nodes,
        root,
    };
    validate_indices(&sentence)?;
    Ok(sentence)
}

/// Parses a document: blank-line-separated sentence blocks, ids `s1..sN`.
pub fn parse_document(text: &str, doc_id: &str) -> Result<Document, TreeParseError> {
    let mut sentences = Vec::new();
    for block in split_blocks(text) {
        let id = format!("s{}", sentences.len() + 1);
        sentences.push(parse_tree_with_id(block, &id)?);
    }
    Ok(Document {
        id: doc_id.to_string(),
        sentences,
    })
}

fn split_blocks(text: &str) -> Vec<&str> {
    let mut blocks = Vec::new();
    let mut start = None;
    let mut end = 0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if line.trim().is_empty() {
            if let Some(s) = start.take() {
                blocks.push(&text[s..end]);
            }
        } else {
            if start.is_none() {
                start = Some(offset);
            }
            end = offset + line.len();
        }
        offset += line.len();
    }
    if let Some(s) = start {
        blocks.push(&text[s..end]);
    }
    blocks
}

fn write_quoted(out: &mut String, s: &str) {
    out.push('`');
    out.push_str(s);
    out.push('\'');
}

fn write_morpheme(
    out: &mut String,
    m: &Morpheme,
    ann: Option<(Option<RefProp>, Option<NumberCat>)>,
) {
    out.push('[');
    out.push_str(&m.pos);
    for f in [&m.subpos, &m.conj_type, &m.conj_form] {
        out.push(' ');
        out.push_str(f);
    }
    out.push(' ');
    write_quoted(out, &m.lemma);
    out.push(' ');
    write_quoted(out, &m.surface);
    if let Some((Some(rp), nm)) = ann {
        out.push(' ');
        out.push_str(&rp.to_string());
        if let Some(nm) = nm {
            out.push(' ');
            out.push_str(&nm.to_string());
        }
    }
    out.push(']');
}

fn write_node(out: &mut String, s: &Sentence, id: NodeId, depth: usize, with_annotations: bool) {
    let node = s.node(id);
    let indent = "  ".repeat(depth);
    out.push_str(&indent);
    out.push_str("( <");
    for (i, m) in node.morphemes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
            out.push_str(&indent);
            out.push_str("   ");
        }
        let ann = if i == 0 && with_annotations {
            Some((node.refprop, node.number))
        } else {
            None
        };
        write_morpheme(out, m, ann);
    }
    out.push('>');
    if let Some(k) = node.surface_index {
        out.push_str(&format!(" #{k}"));
    }
    if node.children.is_empty() {
        out.push_str(" )");
        return;
    }
    for &c in &node.children {
        out.push('\n');
        write_node(out, s, c, depth + 1, with_annotations);
    }
    out.push_str(" )");
}

/// Serializes a sentence to the canonical text form. Without annotations the
/// output is the plain six-field format; with annotations, each annotated
/// noun's head morpheme carries the decided categories as extra fields.
pub fn serialize(s: &Sentence, with_annotations: bool) -> String {
    let mut out = String::new();
    write_node(&mut out, s, s.root(), 0, with_annotations);
    out.push('\n');
    out
}

pub fn serialize_document(d: &Document, with_annotations: bool) -> String {
    let mut out = String::new();
    for (i, s) in d.sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&serialize(s, with_annotations));
    }
    out
}
