//! Text formats for schemes and automata.
//!
//! Scheme files have the sections `terminals:`, `nonterminals:`, `start:` and
//! `rules:`; automaton files have `states:`, `initial:`, `colors:` and `delta:`.
//! A header must start in column 1 with no space before its colon, and `#`
//! starts a comment. Entries are one per line, except that `states:` may list
//! several names and `colors:` entries may also be separated by commas.

mod apt;
mod hors;
mod lexer;

pub use apt::{parse_apt, print_apt, print_formula};
pub use hors::{parse_hors, parse_sort, print_hors};

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

pub(crate) use lexer::{sections, Cursor, Line, Section, Tok};

fn required<'a>(secs: &'a [Section], name: &str, eof: usize) -> Result<&'a Section, ParseError> {
    secs.iter()
        .find(|s| s.name == name)
        .ok_or_else(|| ParseError::new(eof, 1, format!("missing section `{}:`", name)))
}

/// The single identifier of a one-value section such as `start:`.
fn single_ident(sec: &Section) -> Result<(String, usize, usize), ParseError> {
    let mut it = sec.lines.iter();
    let Some(line) = it.next() else {
        return Err(ParseError::new(sec.line, sec.name.len() + 2, format!("section `{}:` is empty", sec.name)));
    };
    let mut cur = Cursor::new(line);
    let (name, l, c) = cur.ident()?;
    cur.finish()?;
    if let Some(extra) = it.next() {
        return Err(ParseError::new(extra.line, extra.toks[0].col, format!("section `{}:` takes one name", sec.name)));
    }
    Ok((name.to_string(), l, c))
}
