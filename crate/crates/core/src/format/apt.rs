use super::{required, sections, single_ident, Cursor, ParseError, Tok};
use crate::automata::{Apt, Formula, State};
use indexmap::IndexMap;
use std::fmt::Write;

const KEYWORDS: &[&str] = &["states", "initial", "colors", "delta"];

pub fn parse_apt(text: &str) -> Result<Apt, ParseError> {
    let (secs, eof) = sections(text, KEYWORDS)?;

    let mut states: Vec<String> = Vec::new();
    for line in &required(&secs, "states", eof)?.lines {
        let mut cur = Cursor::new(line);
        while !cur.at_end() {
            let (q, l, c) = cur.ident()?;
            if states.iter().any(|s| s == q) {
                return Err(ParseError::new(l, c, format!("state `{}` declared twice", q)));
            }
            states.push(q.to_string());
        }
    }
    let states_sec = required(&secs, "states", eof)?;
    if states.is_empty() {
        return Err(ParseError::new(states_sec.line, 1, "an automaton needs at least one state"));
    }
    let lookup = |q: &str, l: usize, c: usize| {
        states
            .iter()
            .position(|s| s == q)
            .map(|i| State(i as u32))
            .ok_or_else(|| ParseError::new(l, c, format!("unknown state `{}`", q)))
    };

    let (initial, l, c) = single_ident(required(&secs, "initial", eof)?)?;
    lookup(&initial, l, c)?;

    let colors_sec = required(&secs, "colors", eof)?;
    let mut colors = IndexMap::new();
    for line in &colors_sec.lines {
        let mut cur = Cursor::new(line);
        loop {
            let (q, l, c) = cur.ident()?;
            lookup(q, l, c)?;
            cur.expect(&Tok::Arrow)?;
            let n = cur.num()?;
            let n = u32::try_from(n).map_err(|_| cur.error("color out of range"))?;
            if colors.insert(q.to_string(), n).is_some() {
                return Err(ParseError::new(l, c, format!("state `{}` colored twice", q)));
            }
            if !cur.eat(&Tok::Comma) || cur.at_end() {
                break;
            }
        }
        cur.finish()?;
    }
    if let Some(q) = states.iter().find(|q| !colors.contains_key(*q)) {
        return Err(ParseError::new(colors_sec.line, 1, format!("state `{}` has no color", q)));
    }

    let mut delta: Vec<((String, String), Formula)> = Vec::new();
    for line in &required(&secs, "delta", eof)?.lines {
        let mut cur = Cursor::new(line);
        let (q, l, c) = cur.ident()?;
        lookup(q, l, c)?;
        let (a, ..) = cur.ident()?;
        cur.expect(&Tok::Arrow)?;
        let f = disjunction(&mut cur, &lookup)?;
        cur.finish()?;
        let key = (q.to_string(), a.to_string());
        if delta.iter().any(|(k, _)| *k == key) {
            return Err(ParseError::new(l, c, format!("second transition for ({}, {})", q, a)));
        }
        delta.push((key, f));
    }

    Apt::new(&states, &initial, &colors, delta).map_err(|e| ParseError::new(1, 1, e.to_string()))
}

type Lookup<'a> = dyn Fn(&str, usize, usize) -> Result<State, ParseError> + 'a;

fn disjunction(cur: &mut Cursor, lookup: &Lookup) -> Result<Formula, ParseError> {
    let mut f = conjunction(cur, lookup)?;
    while cur.eat(&Tok::Or) {
        f = Formula::or(f, conjunction(cur, lookup)?);
    }
    Ok(f)
}

fn conjunction(cur: &mut Cursor, lookup: &Lookup) -> Result<Formula, ParseError> {
    let mut f = primary(cur, lookup)?;
    while cur.eat(&Tok::And) {
        f = Formula::and(f, primary(cur, lookup)?);
    }
    Ok(f)
}

fn primary(cur: &mut Cursor, lookup: &Lookup) -> Result<Formula, ParseError> {
    if cur.eat(&Tok::LParen) {
        if let Some(Tok::Num(_)) = cur.peek() {
            let d = cur.num()? as usize;
            if d == 0 {
                return Err(cur.error("directions start at 1"));
            }
            cur.expect(&Tok::Comma)?;
            let (q, l, c) = cur.ident()?;
            let q = lookup(q, l, c)?;
            cur.expect(&Tok::RParen)?;
            return Ok(Formula::atom(d, q));
        }
        let f = disjunction(cur, lookup)?;
        cur.expect(&Tok::RParen)?;
        return Ok(f);
    }
    match cur.peek() {
        Some(Tok::Ident(s)) if s == "true" => {
            cur.next();
            Ok(Formula::True)
        }
        Some(Tok::Ident(s)) if s == "false" => {
            cur.next();
            Ok(Formula::False)
        }
        _ => Err(cur.unexpected("`true`, `false`, `(d,q)` or `(`")),
    }
}

pub fn print_apt(m: &Apt) -> String {
    let mut out = String::from("states:");
    for q in m.states() {
        write!(out, " {}", m.name(q)).unwrap();
    }
    writeln!(out, "\ninitial: {}", m.name(m.initial())).unwrap();
    let colors: Vec<String> = m.states().map(|q| format!("{} -> {}", m.name(q), m.omega(q))).collect();
    writeln!(out, "colors: {}", colors.join(", ")).unwrap();
    out.push_str("delta:\n");
    for (q, a, f) in m.transitions() {
        writeln!(out, "  {} {} -> {}", m.name(q), a, print_formula(f, m)).unwrap();
    }
    out
}

/// Prints with the fewest parentheses that re-parse to the same tree.
pub fn print_formula(f: &Formula, m: &Apt) -> String {
    fn go(f: &Formula, m: &Apt, out: &mut String) {
        match f {
            Formula::True => out.push_str("true"),
            Formula::False => out.push_str("false"),
            Formula::Atom(d, q) => write!(out, "({},{})", d, m.name(*q)).unwrap(),
            Formula::Or(a, b) => {
                go(a, m, out);
                out.push_str(" \\/ ");
                wrap(b, m, out, matches!(**b, Formula::Or(..)));
            }
            Formula::And(a, b) => {
                wrap(a, m, out, matches!(**a, Formula::Or(..)));
                out.push_str(" /\\ ");
                wrap(b, m, out, matches!(**b, Formula::Or(..) | Formula::And(..)));
            }
        }
    }
    fn wrap(f: &Formula, m: &Apt, out: &mut String, parens: bool) {
        if parens {
            out.push('(');
        }
        go(f, m, out);
        if parens {
            out.push(')');
        }
    }
    let mut out = String::new();
    go(f, m, &mut out);
    out
}
