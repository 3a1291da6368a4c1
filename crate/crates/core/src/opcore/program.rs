//! Program representation and its text grammar.
//!
//! Canonical form: calls joined by `|`, arguments comma-separated, no
//! whitespace. Arguments are `n{i}` (problem number), `#{k}` (output of an
//! earlier call), `const_{name}` and signed decimal literals.
//!
//! The parser also accepts `;` or whitespace between calls, a single
//! trailing separator, spaces inside argument lists, and positional
//! subscripts on operation names (`divide_4(349, 4)` as the fourth call).

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum ArgRef {
    /// 0-based position among the numbers extracted from the problem text.
    ProblemNumber(usize),
    /// Full constant token, e.g. `const_pi`.
    Constant(String),
    /// 0-based index of an earlier call in the same program.
    Intermediate(usize),
    Literal(f64),
}

impl fmt::Display for ArgRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArgRef::ProblemNumber(i) => write!(f, "n{i}"),
            ArgRef::Constant(name) => f.write_str(name),
            ArgRef::Intermediate(k) => write!(f, "#{k}"),
            ArgRef::Literal(v) => write!(f, "{v}"),
        }
    }
}

impl std::str::FromStr for ArgRef {
    type Err = ParseError;

    /// One argument token, e.g. `n0`, `#2`, `const_pi` or `3.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let token = s.trim();
        classify_arg(token).ok_or_else(|| ParseError::UnknownArgForm {
            position: 0,
            token: token.to_string(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpCall {
    pub op: String,
    pub args: Vec<ArgRef>,
}

impl OpCall {
    pub fn new(op: impl Into<String>, args: Vec<ArgRef>) -> Self {
        OpCall { op: op.into(), args }
    }
}

impl fmt::Display for OpCall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.op)?;
        for (i, arg) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{arg}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Program {
    pub calls: Vec<OpCall>,
}

impl Program {
    pub fn new(calls: Vec<OpCall>) -> Self {
        Program { calls }
    }

    pub fn len(&self) -> usize {
        self.calls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.calls.is_empty()
    }

    /// Iterates over every argument together with the index of its call.
    pub fn args(&self) -> impl Iterator<Item = (usize, &ArgRef)> {
        self.calls
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.args.iter().map(move |a| (i, a)))
    }

    /// Largest problem-number index referenced, if any.
    pub fn max_problem_ref(&self) -> Option<usize> {
        self.args()
            .filter_map(|(_, a)| match a {
                ArgRef::ProblemNumber(i) => Some(*i),
                _ => None,
            })
            .max()
    }

    pub fn uses_problem_number(&self) -> bool {
        self.max_problem_ref().is_some()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, call) in self.calls.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{call}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Program {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_program(s)
    }
}

/// Errors carry a character offset into the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unrecognized argument `{token}` at {position}")]
    UnknownArgForm { position: usize, token: String },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { position, .. } | ParseError::UnknownArgForm { position, .. } => *position,
        }
    }
}

pub fn serialize_program(p: &Program) -> String {
    p.to_string()
}

pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    Parser::new(text).program()
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_token_char(c: char) -> bool {
    !(c.is_whitespace() || matches!(c, ',' | '(' | ')' | '|' | ';'))
}

impl Parser {
    fn new(text: &str) -> Self {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn skip_ws(&mut self) -> bool {
        let start = self.pos;
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
        self.pos > start
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            position: self.pos,
            message: message.into(),
        })
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        self.skip_ws();
        if self.peek().is_none() {
            return self.err("empty program");
        }
        let mut calls = Vec::new();
        loop {
            let index = calls.len();
            calls.push(self.call(index)?);
            let had_ws = self.skip_ws();
            let had_sep = matches!(self.peek(), Some('|') | Some(';'));
            if had_sep {
                self.pos += 1;
                self.skip_ws();
            }
            match self.peek() {
                None => break,
                Some(_) if had_ws || had_sep => continue,
                Some(c) => return self.err(format!("expected separator, found `{c}`")),
            }
        }
        Ok(Program { calls })
    }

    fn call(&mut self, index: usize) -> Result<OpCall, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(is_name_char) {
            self.pos += 1;
        }
        if self.pos == start {
            return match self.peek() {
                Some(c) => self.err(format!("expected operation name, found `{c}`")),
                None => self.err("expected operation name"),
            };
        }
        let mut name: String = self.chars[start..self.pos].iter().collect();
        if !name.starts_with(|c: char| c.is_ascii_alphabetic()) {
            return Err(ParseError::Syntax {
                position: start,
                message: format!("operation name `{name}` must start with a letter"),
            });
        }
        strip_position_subscript(&mut name, index);
        self.skip_ws();
        if self.peek() != Some('(') {
            return self.err("expected `(`");
        }
        self.pos += 1;
        let mut args = Vec::new();
        loop {
            self.skip_ws();
            args.push(self.arg()?);
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    break;
                }
                Some(c) => return self.err(format!("expected `,` or `)`, found `{c}`")),
                None => return self.err("unclosed argument list"),
            }
        }
        Ok(OpCall { op: name, args })
    }

    fn arg(&mut self) -> Result<ArgRef, ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(is_token_char) {
            self.pos += 1;
        }
        if self.pos == start {
            return match self.peek() {
                None => self.err("unclosed argument list"),
                Some(c) => self.err(format!("expected argument, found `{c}`")),
            };
        }
        let token: String = self.chars[start..self.pos].iter().collect();
        classify_arg(&token).ok_or(ParseError::UnknownArgForm { position: start, token })
    }
}

/// `add_1` as the first call names `add`; real operation names never end in
/// `_<digits>`, so only a subscript equal to the 1-based position is removed.
fn strip_position_subscript(name: &mut String, index: usize) {
    if let Some((base, sub)) = name.rsplit_once('_') {
        if !base.is_empty() && sub.parse::<usize>().ok() == Some(index + 1) {
            let len = base.len();
            name.truncate(len);
        }
    }
}

fn all_digits(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit())
}

fn classify_arg(token: &str) -> Option<ArgRef> {
    if let Some(rest) = token.strip_prefix('n') {
        if all_digits(rest) {
            return rest.parse().ok().map(ArgRef::ProblemNumber);
        }
    }
    if let Some(rest) = token.strip_prefix('#') {
        if all_digits(rest) {
            return rest.parse().ok().map(ArgRef::Intermediate);
        }
    }
    if let Some(rest) = token.strip_prefix("const_") {
        if !rest.is_empty() && rest.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.') {
            return Some(ArgRef::Constant(token.to_string()));
        }
    }
    parse_decimal(token).map(ArgRef::Literal)
}

/// Signed decimal without exponent: `-3`, `0.25`, `.5`, `+7.`.
pub(crate) fn parse_decimal(token: &str) -> Option<f64> {
    let body = token.strip_prefix(['+', '-']).unwrap_or(token);
    let (int, frac) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    let int_ok = int.bytes().all(|b| b.is_ascii_digit());
    let frac_ok = frac.is_none_or(|f| f.bytes().all(|b| b.is_ascii_digit()));
    let has_digits = !int.is_empty() || frac.is_some_and(|f| !f.is_empty());
    if !(int_ok && frac_ok && has_digits) {
        return None;
    }
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}
