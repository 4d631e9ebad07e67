//! A deliberately small regular-expression dialect for field patterns.
//!
//! Supported, and nothing more: literal characters, `.` (any character),
//! character classes `[abc]` / `[a-z]` / `[^...]`, alternation `|`, the
//! Kleene star `*`, grouping `(...)`, and `\` escapes for the
//! metacharacters. Matching is anchored: the whole field must match. The
//! dialect is pinned so that rule files behave identically everywhere.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bad regular expression `{src}`: {msg}")]
pub struct RegexError {
    pub src: String,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Node {
    Alt(Vec<Node>),
    Seq(Vec<Node>),
    Star(Box<Node>),
    Any,
    Lit(char),
    Class {
        negated: bool,
        singles: Vec<char>,
        ranges: Vec<(char, char)>,
    },
}

/// A compiled field regex. Equality and display use the source text.
#[derive(Debug, Clone)]
pub struct MiniRegex {
    src: String,
    node: Node,
}

impl PartialEq for MiniRegex {
    fn eq(&self, other: &Self) -> bool {
        self.src == other.src
    }
}

impl Eq for MiniRegex {}

impl fmt::Display for MiniRegex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

impl MiniRegex {
    pub fn new(src: &str) -> Result<MiniRegex, RegexError> {
        let chars: Vec<char> = src.chars().collect();
        let mut p = Parser { src, chars, pos: 0 };
        let node = p.alternation()?;
        if p.pos != p.chars.len() {
            return Err(p.err("unbalanced `)`"));
        }
        Ok(MiniRegex {
            src: src.to_string(),
            node,
        })
    }

    pub fn as_str(&self) -> &str {
        &self.src
    }

    /// Anchored match over the whole input.
    pub fn is_match(&self, text: &str) -> bool {
        let chars: Vec<char> = text.chars().collect();
        // Position-set simulation: no backtracking blowup, deterministic.
        let ends = advance(&self.node, &chars, &[0]);
        ends.contains(&chars.len())
    }
}

/// All positions reachable after matching `node` starting from each of
/// `starts`; sorted and deduplicated.
fn advance(node: &Node, text: &[char], starts: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = match node {
        Node::Alt(items) => {
            let mut acc = Vec::new();
            for item in items {
                acc.extend(advance(item, text, starts));
            }
            acc
        }
        Node::Seq(items) => {
            let mut positions = starts.to_vec();
            for item in items {
                positions = advance(item, text, &positions);
                if positions.is_empty() {
                    break;
                }
            }
            positions
        }
        Node::Star(inner) => {
            let mut reached: Vec<usize> = starts.to_vec();
            let mut frontier = starts.to_vec();
            loop {
                let next = advance(inner, text, &frontier);
                let fresh: Vec<usize> = next.into_iter().filter(|p| !reached.contains(p)).collect();
                if fresh.is_empty() {
                    break;
                }
                reached.extend(fresh.iter().copied());
                frontier = fresh;
            }
            reached
        }
        Node::Any => starts
            .iter()
            .filter(|&&p| p < text.len())
            .map(|&p| p + 1)
            .collect(),
        Node::Lit(c) => starts
            .iter()
            .filter(|&&p| p < text.len() && text[p] == *c)
            .map(|&p| p + 1)
            .collect(),
        Node::Class {
            negated,
            singles,
            ranges,
        } => starts
            .iter()
            .filter(|&&p| {
                p < text.len() && {
                    let c = text[p];
                    let inside =
                        singles.contains(&c) || ranges.iter().any(|&(lo, hi)| c >= lo && c <= hi);
                    inside != *negated
                }
            })
            .map(|&p| p + 1)
            .collect(),
    };
    out.sort_unstable();
    out.dedup();
    out
}

struct Parser<'a> {
    src: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: impl Into<String>) -> RegexError {
        RegexError {
            src: self.src.to_string(),
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn alternation(&mut self) -> Result<Node, RegexError> {
        let mut branches = vec![self.sequence()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            branches.push(self.sequence()?);
        }
        Ok(if branches.len() == 1 {
            branches.pop().unwrap()
        } else {
            Node::Alt(branches)
        })
    }

    fn sequence(&mut self) -> Result<Node, RegexError> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            let atom = self.atom()?;
            if self.peek() == Some('*') {
                self.pos += 1;
                items.push(Node::Star(Box::new(atom)));
            } else {
                items.push(atom);
            }
        }
        Ok(if items.len() == 1 {
            items.pop().unwrap()
        } else {
            Node::Seq(items)
        })
    }

    fn atom(&mut self) -> Result<Node, RegexError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.alternation()?;
                if self.peek() != Some(')') {
                    return Err(self.err("missing `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('[') => {
                self.pos += 1;
                self.class()
            }
            Some('.') => {
                self.pos += 1;
                Ok(Node::Any)
            }
            Some('*') => Err(self.err("`*` needs a preceding atom")),
            Some('\\') => {
                self.pos += 1;
                match self.peek() {
                    Some(c) => {
                        self.pos += 1;
                        Ok(Node::Lit(c))
                    }
                    None => Err(self.err("dangling `\\`")),
                }
            }
            Some(c) => {
                self.pos += 1;
                Ok(Node::Lit(c))
            }
            None => Err(self.err("unexpected end of expression")),
        }
    }

    fn class(&mut self) -> Result<Node, RegexError> {
        let mut negated = false;
        if self.peek() == Some('^') {
            negated = true;
            self.pos += 1;
        }
        let mut singles = Vec::new();
        let mut ranges = Vec::new();
        loop {
            let c = match self.peek() {
                Some(']') => {
                    self.pos += 1;
                    break;
                }
                Some('\\') => {
                    self.pos += 1;
                    match self.peek() {
                        Some(c) => {
                            self.pos += 1;
                            c
                        }
                        None => return Err(self.err("dangling `\\` in class")),
                    }
                }
                Some(c) => {
                    self.pos += 1;
                    c
                }
                None => return Err(self.err("unterminated character class")),
            };
            if self.peek() == Some('-') && self.chars.get(self.pos + 1).copied() != Some(']') {
                self.pos += 1;
                let hi = match self.peek() {
                    Some('\\') => {
                        self.pos += 1;
                        self.peek()
                            .ok_or_else(|| self.err("dangling `\\` in class"))?
                    }
                    Some(h) => h,
                    None => return Err(self.err("unterminated character class")),
                };
                self.pos += 1;
                if hi < c {
                    return Err(self.err(format!("empty range `{c}-{hi}`")));
                }
                ranges.push((c, hi));
            } else {
                singles.push(c);
            }
        }
        Ok(Node::Class {
            negated,
            singles,
            ranges,
        })
    }
}
