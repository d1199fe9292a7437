use crate::automata::{Apt, Formula, State};
use crate::syntax::{Hors, Rule, SimpleType, Term};
use indexmap::IndexMap;

/// `S = L Nil; L x = if x (L (data x))` over `if:2, data:1, Nil:0`.
pub fn example1_hors() -> Hors {
    let o = SimpleType::Ground;
    let terminals = [("if", 2), ("data", 1), ("Nil", 0)]
        .into_iter()
        .map(|(a, n)| (a.to_string(), n))
        .collect();
    let nonterminals = [("S", o.clone()), ("L", SimpleType::first_order(1))]
        .into_iter()
        .map(|(a, s)| (a.to_string(), s))
        .collect();
    let x = || Term::var("x");
    let rules = IndexMap::from([
        (
            "S".to_string(),
            Rule {
                binders: vec![],
                body: Term::app(Term::nonterminal("L"), Term::terminal("Nil")),
            },
        ),
        (
            "L".to_string(),
            Rule {
                binders: vec![("x".to_string(), o)],
                body: Term::apps(
                    Term::terminal("if"),
                    [
                        x(),
                        Term::app(Term::nonterminal("L"), Term::app(Term::terminal("data"), x())),
                    ],
                ),
            },
        ),
    ]);
    Hors {
        terminals,
        nonterminals,
        rules,
        start: "S".to_string(),
    }
}

/// The running automaton over `q0, q1`, completed on `data` and `Nil`.
pub fn example1_apt(c0: u32, c1: u32) -> Apt {
    let (q0, q1) = (State(0), State(1));
    let delta = vec![
        (("q0", "if"), Formula::and(Formula::atom(2, q0), Formula::atom(2, q1))),
        (("q1", "if"), Formula::and(Formula::atom(1, q1), Formula::atom(2, q0))),
        (("q1", "data"), Formula::atom(1, q1)),
        (("q0", "Nil"), Formula::True),
        (("q1", "Nil"), Formula::True),
    ];
    Apt::new(
        &["q0".to_string(), "q1".to_string()],
        "q0",
        &IndexMap::from([("q0".to_string(), c0), ("q1".to_string(), c1)]),
        delta
            .into_iter()
            .map(|((q, a), f)| ((q.to_string(), a.to_string()), f))
            .collect(),
    )
    .unwrap()
}

/// One state `q` of color `c` with `δ(q, a) = (1, q)` and `δ(q, c) = true`.
pub fn one_state_apt(c: u32) -> Apt {
    Apt::new(
        &["q".to_string()],
        "q",
        &IndexMap::from([("q".to_string(), c)]),
        vec![
            (("q".to_string(), "a".to_string()), Formula::atom(1, State(0))),
            (("q".to_string(), "c".to_string()), Formula::True),
        ],
    )
    .unwrap()
}

/// `S = F; F = a F` over `a:1, c:0`.
pub fn loop_hors() -> Hors {
    crate::format::parse_hors(
        "terminals:\n  a : 1\n  c : 0\nnonterminals:\n  S : o\n  F : o\nstart: S\nrules:\n  S = F\n  F = a F\n",
    )
    .unwrap()
}

/// `S = c` over `a:1, c:0`.
pub fn constant_hors() -> Hors {
    crate::format::parse_hors("terminals:\n  a : 1\n  c : 0\nnonterminals:\n  S : o\nstart: S\nrules:\n  S = c\n").unwrap()
}
