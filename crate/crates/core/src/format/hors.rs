use super::{required, sections, single_ident, Cursor, Line, ParseError, Tok};
use crate::syntax::{Hors, Rule, SimpleType, Term};
use indexmap::IndexMap;
use std::fmt::Write;

const KEYWORDS: &[&str] = &["terminals", "nonterminals", "start", "rules"];

pub fn parse_hors(text: &str) -> Result<Hors, ParseError> {
    let (secs, eof) = sections(text, KEYWORDS)?;

    let mut terminals = IndexMap::new();
    for line in &required(&secs, "terminals", eof)?.lines {
        let mut cur = Cursor::new(line);
        let (name, l, c) = cur.ident()?;
        cur.expect(&Tok::Colon)?;
        let n = cur.num()?;
        cur.finish()?;
        if terminals.insert(name.to_string(), n as usize).is_some() {
            return Err(ParseError::new(l, c, format!("terminal `{}` declared twice", name)));
        }
    }

    let mut nonterminals = IndexMap::new();
    for line in &required(&secs, "nonterminals", eof)?.lines {
        let mut cur = Cursor::new(line);
        let (name, l, c) = cur.ident()?;
        cur.expect(&Tok::Colon)?;
        let sort = sort(&mut cur)?;
        cur.finish()?;
        if terminals.contains_key(name) || nonterminals.insert(name.to_string(), sort).is_some() {
            return Err(ParseError::new(l, c, format!("name `{}` declared twice", name)));
        }
    }

    let (start, ..) = single_ident(required(&secs, "start", eof)?)?;

    let mut rules = IndexMap::new();
    for line in &required(&secs, "rules", eof)?.lines {
        let (name, rule, (l, c)) = rule(line, &terminals, &nonterminals)?;
        if rules.insert(name.clone(), rule).is_some() {
            return Err(ParseError::new(l, c, format!("second rule for `{}`", name)));
        }
    }

    Ok(Hors {
        terminals,
        nonterminals,
        rules,
        start,
    })
}

/// Reads a sort such as `(o -> o) -> o`.
pub fn parse_sort(text: &str) -> Result<SimpleType, ParseError> {
    let (secs, _) = sections(&format!("sort: {}", text), &["sort"])?;
    let line = secs[0]
        .lines
        .first()
        .ok_or_else(|| ParseError::new(1, 1, "empty sort"))?;
    let mut cur = Cursor::new(line);
    let s = sort(&mut cur)?;
    cur.finish()?;
    Ok(s)
}

fn sort(cur: &mut Cursor) -> Result<SimpleType, ParseError> {
    let dom = if cur.eat(&Tok::LParen) {
        let s = sort(cur)?;
        cur.expect(&Tok::RParen)?;
        s
    } else {
        let (name, l, c) = cur.ident()?;
        if name != "o" {
            return Err(ParseError::new(l, c, format!("unknown sort `{}`, expected `o`", name)));
        }
        SimpleType::Ground
    };
    if cur.eat(&Tok::Arrow) {
        Ok(SimpleType::arrow(dom, sort(cur)?))
    } else {
        Ok(dom)
    }
}

type Located<T> = (String, T, (usize, usize));

fn rule(
    line: &Line,
    terminals: &IndexMap<String, usize>,
    nonterminals: &IndexMap<String, SimpleType>,
) -> Result<Located<Rule>, ParseError> {
    let mut cur = Cursor::new(line);
    let (name, l, c) = cur.ident()?;
    let Some(declared) = nonterminals.get(name) else {
        return Err(ParseError::new(l, c, format!("rule for undeclared nonterminal `{}`", name)));
    };
    let domains = declared.domains();
    let mut binders: Vec<(String, SimpleType)> = Vec::new();
    while let Some(Tok::Ident(_)) = cur.peek() {
        let (b, bl, bc) = cur.ident()?;
        let Some(s) = domains.get(binders.len()) else {
            return Err(ParseError::new(bl, bc, format!("`{}` has sort {} and takes {} parameters", name, declared, domains.len())));
        };
        if binders.iter().any(|(x, _)| x == b) {
            return Err(ParseError::new(bl, bc, format!("parameter `{}` repeated", b)));
        }
        binders.push((b.to_string(), (*s).clone()));
    }
    cur.expect(&Tok::Eq)?;
    let scope = Scope {
        binders: &binders,
        terminals,
        nonterminals,
    };
    let body = expr(&mut cur, &scope)?;
    cur.finish()?;
    Ok((name.to_string(), Rule { binders, body }, (l, c)))
}

struct Scope<'a> {
    binders: &'a [(String, SimpleType)],
    terminals: &'a IndexMap<String, usize>,
    nonterminals: &'a IndexMap<String, SimpleType>,
}

fn expr(cur: &mut Cursor, scope: &Scope) -> Result<Term, ParseError> {
    let mut t = atom(cur, scope)?;
    while matches!(cur.peek(), Some(Tok::Ident(_) | Tok::LParen)) {
        t = Term::app(t, atom(cur, scope)?);
    }
    Ok(t)
}

fn atom(cur: &mut Cursor, scope: &Scope) -> Result<Term, ParseError> {
    if cur.eat(&Tok::LParen) {
        let t = expr(cur, scope)?;
        cur.expect(&Tok::RParen)?;
        return Ok(t);
    }
    let (name, l, c) = cur.ident()?;
    if scope.binders.iter().any(|(b, _)| b == name) {
        Ok(Term::var(name))
    } else if scope.nonterminals.contains_key(name) {
        Ok(Term::nonterminal(name))
    } else if scope.terminals.contains_key(name) {
        Ok(Term::terminal(name))
    } else {
        Err(ParseError::new(l, c, format!("unknown name `{}`", name)))
    }
}

pub fn print_hors(h: &Hors) -> String {
    let mut out = String::from("terminals:\n");
    for (a, n) in &h.terminals {
        writeln!(out, "  {} : {}", a, n).unwrap();
    }
    out.push_str("nonterminals:\n");
    for (f, s) in &h.nonterminals {
        writeln!(out, "  {} : {}", f, s).unwrap();
    }
    writeln!(out, "start: {}", h.start).unwrap();
    out.push_str("rules:\n");
    for (f, r) in &h.rules {
        write!(out, "  {}", f).unwrap();
        for (x, _) in &r.binders {
            write!(out, " {}", x).unwrap();
        }
        writeln!(out, " = {}", r.body).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::example1_hors;

    const EX1: &str = "# running example
terminals:
  if : 2
  data : 1
  Nil : 0
nonterminals:
  S : o
  L : o -> o
start: S
rules:
  S = L Nil
  L x = if x (L (data x))
";

    #[test]
    fn parses_running_example() {
        assert_eq!(parse_hors(EX1).unwrap(), example1_hors());
    }

    #[test]
    fn print_round_trips() {
        let h = example1_hors();
        assert_eq!(parse_hors(&print_hors(&h)).unwrap(), h);
        assert_eq!(print_hors(&h), EX1.trim_start_matches("# running example\n"));
    }

    #[test]
    fn sorts_are_right_associative() {
        let s = parse_sort("(o -> o) -> o -> o").unwrap();
        assert_eq!(s.to_string(), "(o -> o) -> o -> o");
        assert_eq!(s.arity(), 2);
        assert_eq!(parse_sort("o -> (o -> o)").unwrap(), SimpleType::first_order(2));
    }

    #[test]
    fn errors_are_positioned() {
        let bad = EX1.replace("L x = if x", "L x = if y");
        let e = parse_hors(&bad).unwrap_err();
        assert_eq!((e.line, e.column), (12, 12));
        assert!(e.message.contains("unknown name `y`"));

        let e = parse_hors(&EX1.replace("if : 2", "if : two")).unwrap_err();
        assert_eq!((e.line, e.column), (3, 8));

        let e = parse_hors(&EX1.replace("start: S\n", "")).unwrap_err();
        assert!(e.message.contains("missing section `start:`"));

        let e = parse_hors("  S = a\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 3));
    }

    #[test]
    fn annotated_names_lex_as_identifiers() {
        let text = "terminals:\n  a@{1:2.q}->q : 1\nnonterminals:\n  F@<q> : o\n  G@<{0.q,e.({e.q}->q)}->q> : o -> o\nstart: F@<q>\nrules:\n  F@<q> = a@{1:2.q}->q F@<q>\n  G@<{0.q,e.({e.q}->q)}->q> x = x\n";
        let h = parse_hors(text).unwrap();
        assert_eq!(h.start, "F@<q>");
        assert!(h.nonterminals.contains_key("G@<{0.q,e.({e.q}->q)}->q>"));
        assert_eq!(parse_hors(&print_hors(&h)).unwrap(), h);
    }
}
