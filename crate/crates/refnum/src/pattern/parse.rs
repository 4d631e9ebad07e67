//! Recursive-descent parser for the pattern text format.

use thiserror::Error;

use super::regex::MiniRegex;
use super::{Cmp, FieldItem, FieldPattern, MorphItem, MorphemeTemplate, NodeTemplate, Pattern};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternParseError {
    #[error("pattern syntax error at line {line}, column {col}: {msg}")]
    Syntax {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("numguard references `{binder}`, which no `${binder}` field binds")]
    UnboundGuard { binder: String },
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    col: usize,
}

impl Cursor {
    fn new(src: &str) -> Self {
        Cursor {
            chars: src.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
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

    fn err(&self, msg: impl Into<String>) -> PatternParseError {
        PatternParseError::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), PatternParseError> {
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

    /// Bare token; `*` and `=` are ordinary token characters here so that
    /// `modee*` and comparison operators lex naturally.
    fn bare_token(&mut self) -> Result<String, PatternParseError> {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if c.is_whitespace()
                || matches!(
                    c,
                    '(' | ')' | '<' | '>' | '[' | ']' | '`' | '\'' | '/' | '$' | '#'
                )
            {
                break;
            }
            out.push(c);
            self.bump();
        }
        if out.is_empty() {
            Err(self.err("expected a token"))
        } else {
            Ok(out)
        }
    }

    fn quoted(&mut self) -> Result<String, PatternParseError> {
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('\'') => return Ok(out),
                Some(c) => out.push(c),
                None => return Err(self.err("unterminated quoted string")),
            }
        }
    }

    /// `/.../` with `\/` escaping the delimiter.
    fn regex_text(&mut self) -> Result<String, PatternParseError> {
        self.bump();
        let mut out = String::new();
        loop {
            match self.bump() {
                Some('/') => return Ok(out),
                Some('\\') => match self.bump() {
                    Some('/') => out.push('/'),
                    Some(c) => {
                        out.push('\\');
                        out.push(c);
                    }
                    None => return Err(self.err("unterminated regex")),
                },
                Some(c) => out.push(c),
                None => return Err(self.err("unterminated regex")),
            }
        }
    }
}

/// Parses a pattern and validates that every `numguard` binder is bound by
/// some `$x` field in the same pattern.
pub fn parse_pattern(text: &str) -> Result<Pattern, PatternParseError> {
    let mut cur = Cursor::new(text);
    let p = pattern(&mut cur)?;
    cur.skip_ws();
    if cur.peek().is_some() {
        return Err(cur.err("trailing input after pattern"));
    }
    let bound = p.binders();
    for g in p.guards() {
        if !bound.contains(&g) {
            return Err(PatternParseError::UnboundGuard { binder: g });
        }
    }
    Ok(p)
}

fn pattern(cur: &mut Cursor) -> Result<Pattern, PatternParseError> {
    cur.skip_ws();
    match cur.peek() {
        Some('-') => {
            cur.bump();
            Ok(Pattern::AnySubtree)
        }
        Some('(') => {
            cur.bump();
            cur.skip_ws();
            if cur.peek() == Some('<') {
                node_template(cur)
            } else {
                operator_form(cur)
            }
        }
        Some(c) => Err(cur.err(format!("expected `(` or `-`, found `{c}`"))),
        None => Err(cur.err("expected a pattern")),
    }
}

/// Already inside `(`, at `<`.
fn node_template(cur: &mut Cursor) -> Result<Pattern, PatternParseError> {
    cur.expect('<')?;
    let mut morphemes = Vec::new();
    loop {
        cur.skip_ws();
        match cur.peek() {
            Some('[') => {
                cur.bump();
                morphemes.push(MorphItem::Template(morpheme_template(cur)?));
            }
            Some('-') => {
                cur.bump();
                morphemes.push(MorphItem::Gap);
            }
            Some('>') => {
                cur.bump();
                break;
            }
            Some(c) => return Err(cur.err(format!("expected `[`, `-` or `>`, found `{c}`"))),
            None => return Err(cur.err("unterminated morpheme list")),
        }
    }
    if !morphemes
        .iter()
        .any(|m| matches!(m, MorphItem::Template(_)))
    {
        // `< - >` alone is fine; an entirely empty list is not.
        if morphemes.is_empty() {
            return Err(cur.err("node template has no morpheme items"));
        }
    }
    let mut children = Vec::new();
    let mut allow_extra = false;
    loop {
        cur.skip_ws();
        match cur.peek() {
            Some(')') => {
                cur.bump();
                break;
            }
            Some('-') => {
                cur.bump();
                allow_extra = true;
            }
            Some('(') => children.push(pattern_at_paren(cur)?),
            Some(c) => return Err(cur.err(format!("expected a child pattern or `)`, found `{c}`"))),
            None => return Err(cur.err("unterminated node template")),
        }
    }
    Ok(Pattern::Template(NodeTemplate {
        morphemes,
        children,
        allow_extra,
    }))
}

fn pattern_at_paren(cur: &mut Cursor) -> Result<Pattern, PatternParseError> {
    cur.bump(); // consume `(`
    cur.skip_ws();
    if cur.peek() == Some('<') {
        node_template(cur)
    } else {
        operator_form(cur)
    }
}

/// Already inside `(`, at an operator head.
fn operator_form(cur: &mut Cursor) -> Result<Pattern, PatternParseError> {
    cur.skip_ws();
    let head = cur.bare_token()?;
    let out = match head.as_str() {
        "and" | "or" => {
            let mut items = Vec::new();
            loop {
                cur.skip_ws();
                if cur.peek() == Some(')') {
                    break;
                }
                items.push(pattern(cur)?);
            }
            if items.is_empty() {
                return Err(cur.err(format!("`{head}` needs at least one operand")));
            }
            if head == "and" {
                Pattern::And(items)
            } else {
                Pattern::Or(items)
            }
        }
        "not" => Pattern::Not(Box::new(pattern(cur)?)),
        "modee" => Pattern::Modee(Box::new(pattern(cur)?)),
        "modee*" => Pattern::ModeeStar(Box::new(pattern(cur)?)),
        "numguard" => {
            cur.skip_ws();
            let binder = cur.bare_token()?;
            cur.skip_ws();
            let cmp = match cur.peek() {
                Some('>') => {
                    cur.bump();
                    if cur.bare_token()? != "=" {
                        return Err(cur.err("comparators are `=`, `>=`, `<=`"));
                    }
                    Cmp::Ge
                }
                Some('<') => {
                    cur.bump();
                    if cur.bare_token()? != "=" {
                        return Err(cur.err("comparators are `=`, `>=`, `<=`"));
                    }
                    Cmp::Le
                }
                _ => {
                    let tok = cur.bare_token()?;
                    if tok != "=" {
                        return Err(cur.err("comparators are `=`, `>=`, `<=`"));
                    }
                    Cmp::Eq
                }
            };
            cur.skip_ws();
            let num = cur.bare_token()?;
            let value = num
                .parse::<i64>()
                .map_err(|_| cur.err(format!("expected an integer, found `{num}`")))?;
            Pattern::NumGuard { binder, cmp, value }
        }
        "refprop" => {
            cur.skip_ws();
            let tok = cur.bare_token()?;
            Pattern::RefPropIs(
                tok.parse()
                    .map_err(|_| cur.err(format!("unknown referential category `{tok}`")))?,
            )
        }
        "number" => {
            cur.skip_ws();
            let tok = cur.bare_token()?;
            Pattern::NumberIs(
                tok.parse()
                    .map_err(|_| cur.err(format!("unknown number category `{tok}`")))?,
            )
        }
        "seen-before" => Pattern::SeenBefore,
        other => return Err(cur.err(format!("unknown operator `{other}`"))),
    };
    cur.expect(')')?;
    Ok(out)
}

/// Already past `[`.
fn morpheme_template(cur: &mut Cursor) -> Result<MorphemeTemplate, PatternParseError> {
    let mut items = Vec::new();
    loop {
        cur.skip_ws();
        match cur.peek() {
            Some(']') => {
                cur.bump();
                break;
            }
            Some('-') => {
                cur.bump();
                items.push(FieldItem::Gap);
            }
            Some('`') | Some('\'') => {
                let s = cur.quoted()?;
                items.push(FieldItem::Pat(FieldPattern::Literal(s)));
            }
            Some('/') => {
                let (line, col) = (cur.line, cur.col);
                let src = cur.regex_text()?;
                let re = MiniRegex::new(&src).map_err(|e| PatternParseError::Syntax {
                    line,
                    col,
                    msg: e.to_string(),
                })?;
                items.push(FieldItem::Pat(FieldPattern::Regex(re)));
            }
            Some('$') => {
                cur.bump();
                let name = cur.bare_token()?;
                items.push(FieldItem::Pat(FieldPattern::NumBind(name)));
            }
            Some(_) => {
                let tok = cur.bare_token()?;
                if tok == "_" {
                    items.push(FieldItem::Pat(FieldPattern::Any));
                } else {
                    items.push(FieldItem::Pat(FieldPattern::Literal(tok)));
                }
            }
            None => return Err(cur.err("unterminated morpheme template")),
        }
    }
    if items.is_empty() {
        return Err(cur.err("empty morpheme template"));
    }
    if items
        .iter()
        .filter(|i| matches!(i, FieldItem::Pat(_)))
        .count()
        > 6
    {
        return Err(cur.err("morpheme template has more than six field patterns"));
    }
    Ok(MorphemeTemplate { items })
}
