//! The `.kss` digit-system language.
//!
//! ```text
//! spec   := header item*
//! header := "base" INT "dim" INT
//! item   := "state" IDENT ["initial"]
//!         | "edge" IDENT "-(" INT ("," INT)* ")->" IDENT
//!         | "allow" "(" INT ("," INT)* ")"
//! ```
//!
//! `#` starts a comment running to the end of the line. `allow` declares one
//! implicit initial state with a self-loop per line and cannot be mixed with
//! explicit `state`/`edge` items.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::automaton::{live_states, trim, SetAutomaton};
use crate::digits::{Alphabet, MAX_BASE, MAX_DIM};
use crate::error::{Error, Pos, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitSystemSpec {
    pub k: u32,
    pub d: u32,
    pub name: Option<String>,
    pub pos: Pos,
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    State {
        name: String,
        initial: bool,
        pos: Pos,
    },
    Edge {
        from: String,
        digits: Vec<u32>,
        to: String,
        pos: Pos,
        from_pos: Pos,
        to_pos: Pos,
    },
    Allow {
        digits: Vec<u32>,
        pos: Pos,
    },
}

impl Item {
    pub fn pos(&self) -> Pos {
        match self {
            Item::State { pos, .. } | Item::Edge { pos, .. } | Item::Allow { pos, .. } => *pos,
        }
    }
}

impl DigitSystemSpec {
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// True for the `allow` sugar form.
    pub fn is_sugar(&self) -> bool {
        self.items.iter().any(|i| matches!(i, Item::Allow { .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Base,
    Dim,
    State,
    Initial,
    Edge,
    Allow,
    Int(String),
    Ident(String),
    EdgeOpen,
    EdgeClose,
    LParen,
    RParen,
    Comma,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Base => "`base`".into(),
            Tok::Dim => "`dim`".into(),
            Tok::State => "`state`".into(),
            Tok::Initial => "`initial`".into(),
            Tok::Edge => "`edge`".into(),
            Tok::Allow => "`allow`".into(),
            Tok::Int(s) => format!("integer `{s}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::EdgeOpen => "`-(`".into(),
            Tok::EdgeClose => "`)->`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() {
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            Tok::Int(chars[start..i].iter().collect())
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match word.as_str() {
                "base" => Tok::Base,
                "dim" => Tok::Dim,
                "state" => Tok::State,
                "initial" => Tok::Initial,
                "edge" => Tok::Edge,
                "allow" => Tok::Allow,
                _ => Tok::Ident(word),
            }
        } else if c == '-' && chars.get(i + 1) == Some(&'(') {
            i += 2;
            Tok::EdgeOpen
        } else if c == ')' && chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') {
            i += 3;
            Tok::EdgeClose
        } else {
            i += 1;
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                other => {
                    return Err(Error::Syntax {
                        pos,
                        expected: vec!["a token".into()],
                        found: format!("character `{other}`"),
                    })
                }
            }
        };
        col += i - start;
        toks.push((tok, pos));
    }
    toks.push((Tok::Eof, Pos { line, col }));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    k: u32,
    d: u32,
}

impl Parser {
    fn peek(&self) -> &(Tok, Pos) {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T> {
        let (tok, pos) = self.peek();
        Err(Error::Syntax {
            pos: *pos,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.describe(),
        })
    }

    fn expect(&mut self, want: Tok, name: &str) -> Result<Pos> {
        if self.peek().0 == want {
            Ok(self.bump().1)
        } else {
            self.fail(&[name])
        }
    }

    fn int(&mut self) -> Result<(String, Pos)> {
        match self.peek().clone() {
            (Tok::Int(s), pos) => {
                self.bump();
                Ok((s, pos))
            }
            _ => self.fail(&["integer"]),
        }
    }

    fn ident(&mut self) -> Result<(String, Pos)> {
        match self.peek().clone() {
            (Tok::Ident(s), pos) => {
                self.bump();
                Ok((s, pos))
            }
            _ => self.fail(&["identifier"]),
        }
    }

    fn digit(&mut self) -> Result<u32> {
        let (text, pos) = self.int()?;
        match text.parse::<u32>() {
            Ok(v) if v < self.k => Ok(v),
            _ => Err(Error::DigitRange {
                pos,
                digit: text,
                k: self.k,
            }),
        }
    }

    /// INT ("," INT)* followed by `close`.
    fn tuple(&mut self, close: Tok, close_name: &str, start: Pos) -> Result<Vec<u32>> {
        let mut digits = vec![self.digit()?];
        loop {
            match self.peek().0 {
                Tok::Comma => {
                    self.bump();
                    digits.push(self.digit()?);
                }
                ref t if *t == close => {
                    self.bump();
                    break;
                }
                _ => return self.fail(&["`,`", close_name]),
            }
        }
        if digits.len() != self.d as usize {
            return Err(Error::ArityMismatch {
                pos: start,
                expected: self.d as usize,
                found: digits.len(),
            });
        }
        Ok(digits)
    }

    fn header_value(&mut self, kw: Tok, name: &str, range: std::ops::RangeInclusive<u32>) -> Result<u32> {
        self.expect(kw, name)?;
        let (text, pos) = self.int()?;
        match text.parse::<u32>() {
            Ok(v) if range.contains(&v) => Ok(v),
            _ => Err(Error::UnsupportedHeader {
                pos,
                message: format!(
                    "{} {text} outside supported range {}..={}",
                    name.trim_matches('`'),
                    range.start(),
                    range.end()
                ),
            }),
        }
    }
}

/// Parses `.kss` text into a checked AST.
pub fn parse_spec(text: &str) -> Result<DigitSystemSpec> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        k: 2,
        d: 1,
    };
    let pos = p.peek().1;
    p.k = p.header_value(Tok::Base, "`base`", 2..=MAX_BASE)?;
    p.d = p.header_value(Tok::Dim, "`dim`", 1..=MAX_DIM)?;
    let mut items = Vec::new();
    loop {
        let (tok, at) = p.peek().clone();
        match tok {
            Tok::Eof => break,
            Tok::State => {
                p.bump();
                let (name, _) = p.ident()?;
                let initial = if p.peek().0 == Tok::Initial {
                    p.bump();
                    true
                } else {
                    false
                };
                items.push(Item::State { name, initial, pos: at });
            }
            Tok::Edge => {
                p.bump();
                let (from, from_pos) = p.ident()?;
                let open = p.expect(Tok::EdgeOpen, "`-(`")?;
                let digits = p.tuple(Tok::EdgeClose, "`)->`", open)?;
                let (to, to_pos) = p.ident()?;
                items.push(Item::Edge {
                    from,
                    digits,
                    to,
                    pos: at,
                    from_pos,
                    to_pos,
                });
            }
            Tok::Allow => {
                p.bump();
                let open = p.expect(Tok::LParen, "`(`")?;
                let digits = p.tuple(Tok::RParen, "`)`", open)?;
                items.push(Item::Allow { digits, pos: at });
            }
            _ => return p.fail(&["`state`", "`edge`", "`allow`", "end of input"]),
        }
    }
    let spec = DigitSystemSpec {
        k: p.k,
        d: p.d,
        name: None,
        pos,
        items,
    };
    check_declarations(&spec, p.peek().1)?;
    Ok(spec)
}

fn check_declarations(spec: &DigitSystemSpec, eof: Pos) -> Result<()> {
    let mut declared: HashMap<&str, Pos> = HashMap::new();
    let mut initial: Option<&str> = None;
    let mut has_allow = false;
    let mut has_explicit = false;
    for item in &spec.items {
        match item {
            Item::Allow { pos, .. } => {
                if has_explicit {
                    return Err(Error::MixedForms { pos: *pos });
                }
                has_allow = true;
            }
            Item::State { name, initial: init, pos } => {
                if has_allow {
                    return Err(Error::MixedForms { pos: *pos });
                }
                has_explicit = true;
                if declared.insert(name, *pos).is_some() {
                    return Err(Error::DuplicateState {
                        pos: *pos,
                        name: name.clone(),
                    });
                }
                if *init {
                    if initial.is_some() {
                        return Err(Error::MultipleInitial {
                            pos: *pos,
                            name: name.clone(),
                        });
                    }
                    initial = Some(name);
                }
            }
            Item::Edge { pos, .. } => {
                if has_allow {
                    return Err(Error::MixedForms { pos: *pos });
                }
                has_explicit = true;
            }
        }
    }
    if has_allow {
        return Ok(());
    }
    for item in &spec.items {
        if let Item::Edge {
            from,
            to,
            from_pos,
            to_pos,
            ..
        } = item
        {
            for (name, pos) in [(from, from_pos), (to, to_pos)] {
                if !declared.contains_key(name.as_str()) {
                    return Err(Error::UnknownState {
                        pos: *pos,
                        name: name.clone(),
                    });
                }
            }
        }
    }
    if initial.is_none() {
        let pos = spec.items.first().map(Item::pos).unwrap_or(eof);
        return Err(Error::NoInitial { pos });
    }
    Ok(())
}

/// Builds the trim automaton a spec describes.
///
/// Declared states that cannot start an infinite path are reported rather
/// than dropped; live but unreachable states are trimmed silently.
pub fn validate(spec: &DigitSystemSpec) -> Result<SetAutomaton> {
    let alphabet = Alphabet::new(spec.k, spec.d)?;
    if spec.is_sugar() {
        let letters: Vec<Vec<u32>> = spec
            .items
            .iter()
            .filter_map(|i| match i {
                Item::Allow { digits, .. } => Some(digits.clone()),
                _ => None,
            })
            .collect();
        return SetAutomaton::single_state(alphabet, &letters);
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut names: Vec<(&str, Pos)> = Vec::new();
    let mut initial = Vec::new();
    for item in &spec.items {
        if let Item::State { name, initial: init, pos } = item {
            index.insert(name, names.len());
            if *init {
                initial.push(names.len());
            }
            names.push((name, *pos));
        }
    }
    let mut edges = Vec::new();
    for item in &spec.items {
        if let Item::Edge { from, digits, to, .. } = item {
            edges.push((index[from.as_str()], alphabet.encode(digits)?, index[to.as_str()]));
        }
    }
    let raw = SetAutomaton::from_edges_untrimmed(alphabet, names.len(), initial, edges)?;
    let live = live_states(&raw);
    if let Some(q) = live.iter().position(|&l| !l) {
        let (name, pos) = names[q];
        return Err(Error::DeadState {
            pos,
            name: name.to_string(),
        });
    }
    trim(&raw)
}

/// Parse and validate in one step.
pub fn load(text: &str) -> Result<SetAutomaton> {
    validate(&parse_spec(text)?)
}

fn write_tuple(out: &mut String, digits: &[u32]) {
    for (i, b) in digits.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "{b}");
    }
}

/// Canonical text of a spec: one item per line, single spaces, no comments.
pub fn print_spec(spec: &DigitSystemSpec) -> String {
    let mut out = format!("base {}\ndim {}\n", spec.k, spec.d);
    for item in &spec.items {
        match item {
            Item::State { name, initial, .. } => {
                let _ = write!(out, "state {name}");
                if *initial {
                    out.push_str(" initial");
                }
            }
            Item::Edge { from, digits, to, .. } => {
                let _ = write!(out, "edge {from} -(");
                write_tuple(&mut out, digits);
                let _ = write!(out, ")-> {to}");
            }
            Item::Allow { digits, .. } => {
                out.push_str("allow (");
                write_tuple(&mut out, digits);
                out.push(')');
            }
        }
        out.push('\n');
    }
    out
}
