#![allow(dead_code)]

pub mod criteria;

use homc::automata::{Apt, Formula, State};
use homc::format::{parse_apt, parse_hors};
use homc::game::{zielonka, Owner, ParityGame};
use homc::syntax::{Hors, SimpleType, Term};
use indexmap::IndexMap;
use rand::Rng;
use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

/// Scheme and automaton files that are checked together.
pub const PAIRS: &[(&str, &str)] = &[
    ("ex1.hors", "ex1.apt"),
    ("loop.hors", "loop-omega1.apt"),
    ("loop.hors", "loop-omega2.apt"),
    ("const.hors", "const.apt"),
    ("alternate.hors", "alternate.apt"),
    ("only-a.hors", "alternate.apt"),
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{}: {}", name, e))
}

pub fn hors(name: &str) -> Hors {
    parse_hors(&fixture(name)).unwrap_or_else(|e| panic!("{}: {}", name, e))
}

pub fn apt(name: &str) -> Apt {
    parse_apt(&fixture(name)).unwrap_or_else(|e| panic!("{}: {}", name, e))
}

/// Value tree of an order-0 scheme as a finite graph. `None` children are `_|_`.
struct Regular<'a> {
    h: &'a Hors,
    nodes: Vec<(String, Vec<Option<usize>>)>,
    memo: HashMap<String, Option<usize>>,
}

impl Regular<'_> {
    fn nonterminal(&mut self, n: &str) -> Option<usize> {
        let mut chain: Vec<String> = Vec::new();
        let mut cur = n.to_string();
        let found = loop {
            if let Some(&id) = self.memo.get(&cur) {
                break id;
            }
            if chain.contains(&cur) {
                break None;
            }
            let body = self.h.rule(&cur).expect("rule").body.clone();
            if let Term::NonTerminal(next) = &body {
                chain.push(cur);
                cur = next.clone();
                continue;
            }
            let id = self.alloc();
            self.memo.insert(cur.clone(), Some(id));
            for c in &chain {
                self.memo.insert(c.clone(), Some(id));
            }
            self.fill(id, &body);
            return Some(id);
        };
        for c in chain {
            self.memo.insert(c, found);
        }
        found
    }

    fn alloc(&mut self) -> usize {
        self.nodes.push((String::new(), Vec::new()));
        self.nodes.len() - 1
    }

    fn fill(&mut self, id: usize, t: &Term) {
        let (head, args) = t.spine();
        let Term::Terminal(a) = head else {
            panic!("order-0 body with non-terminal head: {:?}", t)
        };
        let mut children = Vec::new();
        for arg in args {
            children.push(self.term(arg));
        }
        self.nodes[id] = (a.clone(), children);
    }

    fn term(&mut self, t: &Term) -> Option<usize> {
        match t {
            Term::NonTerminal(n) => self.nonterminal(n),
            _ => {
                let id = self.alloc();
                self.fill(id, t);
                Some(id)
            }
        }
    }
}

/// Acceptance for order-0 schemes, by the textbook acceptance game on the
/// finite graph of the value tree: Eve picks a clause, Adam an atom, and
/// positions carry `Ω(q)`. `_|_` is rejected from every state.
pub fn regular_accepting(h: &Hors, m: &Apt) -> BTreeSet<State> {
    assert_eq!(h.order(), 0);
    let mut r = Regular {
        h,
        nodes: Vec::new(),
        memo: HashMap::new(),
    };
    let root = r.nonterminal(&h.start);
    let mut g = ParityGame::new();
    let bottom = g.add_node(Owner::Eve, 0);
    let states: Vec<State> = m.states().collect();
    let mut pos = HashMap::new();
    for n in 0..r.nodes.len() {
        for &q in &states {
            pos.insert((n, q), g.add_node(Owner::Eve, m.omega(q)));
        }
    }
    let at = |child: Option<usize>, q: State| child.map_or(bottom, |n| pos[&(n, q)]);
    for (n, (a, children)) in r.nodes.iter().enumerate() {
        for &q in &states {
            for clause in m.clauses(q, a) {
                let c = g.add_node(Owner::Adam, 0);
                g.add_edge(pos[&(n, q)], c);
                for &(k, p) in clause {
                    g.add_edge(c, at(children[k - 1], p));
                }
            }
        }
    }
    let s = zielonka(&g);
    states
        .into_iter()
        .filter(|&q| s.win_eve.contains(&at(root, q)))
        .collect()
}

fn random_formula<R: Rng>(rng: &mut R, arity: usize, states: usize, depth: usize) -> Formula {
    if arity == 0 {
        return if rng.gen_bool(0.8) { Formula::True } else { Formula::False };
    }
    let atom = |rng: &mut R| Formula::atom(rng.gen_range(1..=arity), State(rng.gen_range(0..states) as u32));
    match rng.gen_range(0..10) {
        _ if depth == 0 => atom(rng),
        0 => Formula::True,
        1 => Formula::False,
        2..=4 => atom(rng),
        5..=7 => Formula::and(
            random_formula(rng, arity, states, depth - 1),
            random_formula(rng, arity, states, depth - 1),
        ),
        _ => Formula::or(
            random_formula(rng, arity, states, depth - 1),
            random_formula(rng, arity, states, depth - 1),
        ),
    }
}

/// A complete automaton over `terminals` with up to `max_states` states.
pub fn random_apt<R: Rng>(rng: &mut R, terminals: &[(&str, usize)], max_states: usize, max_color: u32) -> Apt {
    let n = rng.gen_range(1..=max_states);
    let names: Vec<String> = (0..n).map(|i| format!("q{}", i)).collect();
    let colors: IndexMap<String, u32> = names.iter().map(|q| (q.clone(), rng.gen_range(0..=max_color))).collect();
    let mut delta = Vec::new();
    for q in &names {
        for &(a, k) in terminals {
            delta.push(((q.clone(), a.to_string()), random_formula(rng, k, n, 2)));
        }
    }
    Apt::new(&names, "q0", &colors, delta).expect("random automaton")
}

pub const ORDER0_TERMINALS: &[(&str, usize)] = &[("a", 1), ("b", 2), ("c", 0)];

fn random_body<R: Rng>(rng: &mut R, nts: usize, depth: usize, vars: &[&str]) -> String {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        let pick = rng.gen_range(0..nts + 1 + vars.len());
        return if pick < nts {
            format!("N{}", pick)
        } else if pick == nts {
            "c".to_string()
        } else {
            vars[pick - nts - 1].to_string()
        };
    }
    let arg = |rng: &mut R| {
        let s = random_body(rng, nts, depth - 1, vars);
        if s.contains(' ') {
            format!("({})", s)
        } else {
            s
        }
    };
    if rng.gen_bool(0.5) {
        format!("a {}", arg(rng))
    } else {
        let l = arg(rng);
        format!("b {} {}", l, arg(rng))
    }
}

fn scheme_text(decls: &[(String, &str)], rules: &[String]) -> String {
    let mut s = String::from("terminals:\n  a : 1\n  b : 2\n  c : 0\nnonterminals:\n");
    for (n, sort) in decls {
        s.push_str(&format!("  {} : {}\n", n, sort));
    }
    s.push_str("start: N0\nrules:\n");
    for r in rules {
        s.push_str(&format!("  {}\n", r));
    }
    s
}

/// A scheme with ground nonterminals `N0..` over `a:1, b:2, c:0`.
pub fn random_order0<R: Rng>(rng: &mut R) -> Hors {
    let k = rng.gen_range(1..=4);
    let decls: Vec<(String, &str)> = (0..k).map(|i| (format!("N{}", i), "o")).collect();
    let rules: Vec<String> = (0..k)
        .map(|i| format!("N{} = {}", i, random_body(rng, k, 3, &[])))
        .collect();
    let text = scheme_text(&decls, &rules);
    parse_hors(&text).unwrap_or_else(|e| panic!("{}\n{}", e, text))
}

/// `N0 : o` plus order-1 nonterminals `N1.. : o -> o` over `a:1, b:2, c:0`.
pub fn random_order1<R: Rng>(rng: &mut R) -> Hors {
    let k = rng.gen_range(2..=3);
    let decls: Vec<(String, &str)> = (0..k)
        .map(|i| (format!("N{}", i), if i == 0 { "o" } else { "o -> o" }))
        .collect();
    let mut rules = Vec::new();
    for i in 0..k {
        let body = random_order1_body(rng, k, 3, i > 0);
        rules.push(if i == 0 { format!("N0 = {}", body) } else { format!("N{} x = {}", i, body) });
    }
    let text = scheme_text(&decls, &rules);
    parse_hors(&text).unwrap_or_else(|e| panic!("{}\n{}", e, text))
}

fn random_order1_body<R: Rng>(rng: &mut R, nts: usize, depth: usize, has_x: bool) -> String {
    let paren = |s: String| if s.contains(' ') { format!("({})", s) } else { s };
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..3) {
            0 if has_x => "x".to_string(),
            1 => "N0".to_string(),
            _ => "c".to_string(),
        };
    }
    match rng.gen_range(0..3) {
        0 => format!("a {}", paren(random_order1_body(rng, nts, depth - 1, has_x))),
        1 => {
            let l = paren(random_order1_body(rng, nts, depth - 1, has_x));
            format!("b {} {}", l, paren(random_order1_body(rng, nts, depth - 1, has_x)))
        }
        _ => {
            let f = rng.gen_range(1..nts);
            format!("N{} {}", f, paren(random_order1_body(rng, nts, depth - 1, has_x)))
        }
    }
}

/// Up to `max_nodes` nodes with out-degree at most 3; some nodes are dead ends.
pub fn random_game<R: Rng>(rng: &mut R, max_nodes: usize, max_priority: u32) -> ParityGame {
    let n = rng.gen_range(1..=max_nodes);
    let mut g = ParityGame::new();
    for _ in 0..n {
        let owner = if rng.gen_bool(0.5) { Owner::Eve } else { Owner::Adam };
        g.add_node(owner, rng.gen_range(0..=max_priority));
    }
    for v in 0..n {
        let degree = if rng.gen_bool(0.1) { 0 } else { rng.gen_range(1..=3) };
        for _ in 0..degree {
            g.add_edge(v, rng.gen_range(0..n));
        }
    }
    g
}

pub fn sorts_of(names: &[(&str, SimpleType)]) -> Vec<(String, SimpleType)> {
    names.iter().map(|(n, s)| (n.to_string(), s.clone())).collect()
}

/// Every well-sorted applicative term of size at most `max` built from the
/// given variables and terminals, paired with its sort.
pub fn applicative_terms(
    vars: &[(String, SimpleType)],
    terminals: &IndexMap<String, usize>,
    max: usize,
) -> Vec<(Term, SimpleType)> {
    let mut by_size: Vec<Vec<(Term, SimpleType)>> = vec![Vec::new(); max + 1];
    if max == 0 {
        return Vec::new();
    }
    for (x, s) in vars {
        by_size[1].push((Term::var(x.clone()), s.clone()));
    }
    for (a, &k) in terminals {
        by_size[1].push((Term::terminal(a.clone()), SimpleType::first_order(k)));
    }
    for size in 3..=max {
        let mut here = Vec::new();
        for fs in 1..size - 1 {
            let xs = size - 1 - fs;
            for (f, fsort) in &by_size[fs] {
                let SimpleType::Arrow(d, c) = fsort else { continue };
                for (x, xsort) in &by_size[xs] {
                    if xsort == d.as_ref() {
                        here.push((Term::app(f.clone(), x.clone()), c.as_ref().clone()));
                    }
                }
            }
        }
        by_size[size] = here;
    }
    by_size.into_iter().flatten().collect()
}
