//! Witness schemes: an accepting run-tree generated by a recursion scheme over
//! annotated symbols.
//!
//! A terminal `a@{k:c.q',...}->q` is the symbol `a` read in state `q`; it has one
//! child per listed pair, ordered by direction and then by color and state.
//! A direction without pairs is erased and one with several is duplicated.
//! A nonterminal `F@<θ>` produces the trees of `F` at type `θ`, taking one
//! parameter per pair of each argument set of `θ`. Nonterminals `Cast_i` coerce
//! a term to a smaller type.

mod verify;

pub use verify::{check_run, verify_runtree, RunReport};

use crate::automata::{Apt, Color, ColoredProfile, State};
use crate::game::{Analysis, Assumptions, BuildOptions, GameError, GameNode};
use crate::itypes::{ColoredSet, IType, ITypeError};
use crate::syntax::{check_wellformed, Hors, Rule, SimpleType, Term};
use crate::typing::{derive, Derivation, Name, Step, TypeEnv};
use indexmap::IndexMap;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

/// What an annotated terminal stands for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TerminalLabel {
    pub symbol: String,
    /// One set per direction of `symbol`.
    pub profile: ColoredProfile,
    pub state: State,
}

impl TerminalLabel {
    pub fn arity(&self) -> usize {
        self.profile.iter().map(|s| s.len()).sum()
    }

    /// Children in order, as `(direction, color, state)`.
    pub fn children(&self) -> impl Iterator<Item = (usize, Color, State)> + '_ {
        self.profile
            .iter()
            .enumerate()
            .flat_map(|(k, s)| s.iter().map(move |&(c, q)| (k + 1, c, q)))
    }

    /// `a@{1:0.q1,2:0.q0}->q0`.
    pub fn name(&self, m: &Apt) -> String {
        let pairs: Vec<String> = self.children().map(|(k, c, q)| format!("{}:{}.{}", k, c, m.name(q))).collect();
        format!("{}@{{{}}}->{}", self.symbol, pairs.join(","), m.name(self.state))
    }

    /// Inverse of `name`, given the arity of the underlying symbol.
    pub fn parse(name: &str, arity: usize, m: &Apt) -> Result<TerminalLabel, String> {
        let (symbol, rest) = name.split_once('@').ok_or("missing `@` annotation")?;
        let (inner, state) = rest
            .strip_prefix('{')
            .and_then(|r| r.split_once("}->"))
            .ok_or("expected `{...}->state` after `@`")?;
        let state = m.state(state).ok_or_else(|| format!("unknown state `{}`", state))?;
        let mut profile: ColoredProfile = vec![BTreeSet::new(); arity];
        for item in inner.split(',').filter(|s| !s.is_empty()) {
            let bad = || format!("malformed pair `{}`", item);
            let (k, cq) = item.split_once(':').ok_or_else(bad)?;
            let (c, q) = cq.split_once('.').ok_or_else(bad)?;
            let k: usize = k.parse().map_err(|_| bad())?;
            let c = crate::itypes::parse_color(c).ok_or_else(bad)?;
            let q = m.state(q).ok_or_else(|| format!("unknown state `{}`", q))?;
            if k == 0 || k > arity {
                return Err(format!("direction {} out of range for `{}` of arity {}", k, symbol, arity));
            }
            profile[k - 1].insert((c, q));
        }
        Ok(TerminalLabel {
            symbol: symbol.to_string(),
            profile,
            state,
        })
    }
}

/// A scheme over annotated symbols together with the meaning of its names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedHors {
    pub hors: Hors,
    /// State at the root.
    pub state: State,
    pub terminals: BTreeMap<String, TerminalLabel>,
    /// `F@<θ>` to `(F, θ)`; coercions are not listed.
    pub nonterminals: BTreeMap<String, (String, IType)>,
}

impl AnnotatedHors {
    /// Rebuilds the name tables of a parsed annotated scheme.
    pub fn from_hors(hors: Hors, original: &Hors, m: &Apt) -> Result<AnnotatedHors, String> {
        let mut terminals = BTreeMap::new();
        for (name, &n) in &hors.terminals {
            let symbol = name.split('@').next().unwrap_or_default();
            let arity = original
                .arity(symbol)
                .ok_or_else(|| format!("`{}` annotates an unknown terminal", name))?;
            let label = TerminalLabel::parse(name, arity, m).map_err(|e| format!("`{}`: {}", name, e))?;
            if label.arity() != n {
                return Err(format!("`{}` is declared with arity {} but has {} children", name, n, label.arity()));
            }
            terminals.insert(name.clone(), label);
        }
        let mut nonterminals = BTreeMap::new();
        for (name, sort) in &hors.nonterminals {
            let Some((f, rest)) = name.split_once('@') else { continue };
            let ty = rest
                .strip_prefix('<')
                .and_then(|r| r.strip_suffix('>'))
                .ok_or_else(|| format!("`{}`: expected `@<type>`", name))?;
            let ty = IType::parse(ty, m).map_err(|e| format!("`{}`: {}", name, e))?;
            let base = original
                .nonterminals
                .get(f)
                .ok_or_else(|| format!("`{}` annotates an unknown nonterminal", name))?;
            if !ty.has_sort(base) || annotated_sort(&ty) != *sort {
                return Err(format!("`{}` is declared with sort {}", name, sort));
            }
            nonterminals.insert(name.clone(), (f.to_string(), ty));
        }
        let state = match nonterminals.get(&hors.start) {
            Some((_, IType::State(q))) => *q,
            _ => return Err(format!("start `{}` is not an annotated ground nonterminal", hors.start)),
        };
        Ok(AnnotatedHors {
            hors,
            state,
            terminals,
            nonterminals,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SelectError {
    #[error("state {0} is rejected")]
    Rejected(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Types(#[from] ITypeError),
    #[error("witness reconstruction failed: {0}")]
    Internal(String),
}

/// The simple type of a term used at `ty`: one argument per pair.
pub fn annotated_sort(ty: &IType) -> SimpleType {
    match ty {
        IType::State(_) => SimpleType::Ground,
        IType::Arrow(u, r) => SimpleType::from_parts(u.iter().map(|(_, b)| annotated_sort(b)), annotated_sort(r)),
    }
}

pub fn nonterminal_name(f: &str, ty: &IType, m: &Apt) -> String {
    format!("{}@<{}>", f, ty.display(m))
}

/// Builds the game for `q`, then extracts a witness if `q` is accepted.
pub fn select(h: &Hors, m: &Apt, q: State, opts: &BuildOptions) -> Result<AnnotatedHors, SelectError> {
    let a = Analysis::run(h, m, &[q], opts)?;
    extract_scheme(h, m, &a, q)
}

/// One nonterminal per Eve node reachable from `Eve(S, q)` under Eve's
/// strategy; each rule is the derivation of the body under the chosen assumptions.
pub fn extract_scheme(h: &Hors, m: &Apt, a: &Analysis, q: State) -> Result<AnnotatedHors, SelectError> {
    let game = &a.game;
    let sol = &a.solution;
    let Some(root) = game.seed(q).filter(|id| sol.win_eve.contains(id)) else {
        return Err(SelectError::Rejected(m.name(q).to_string()));
    };
    let mut ex = Extractor {
        m,
        terminals: IndexMap::new(),
        nonterminals: IndexMap::new(),
        rules: IndexMap::new(),
        labels: BTreeMap::new(),
        names: BTreeMap::new(),
        casts: HashMap::new(),
    };

    let mut seen = BTreeSet::from([root]);
    let mut queue = VecDeque::from([root]);
    let mut order = Vec::new();
    while let Some(v) = queue.pop_front() {
        order.push(v);
        let adam = *sol
            .strategy_eve
            .get(&v)
            .ok_or_else(|| SelectError::Internal(format!("no strategy at won node {}", v)))?;
        for &c in game.arena.successors(adam) {
            for &e in game.arena.successors(c) {
                if seen.insert(e) {
                    queue.push_back(e);
                }
            }
        }
    }

    for v in order {
        let GameNode::Eve { nt, ty } = &game.nodes[v] else {
            return Err(SelectError::Internal(format!("node {} is not an Eve node", v)));
        };
        let GameNode::Adam { delta, .. } = &game.nodes[sol.strategy_eve[&v]] else {
            return Err(SelectError::Internal(format!("strategy at {} does not lead to Adam", v)));
        };
        ex.rule(h, nt, ty, delta)?;
    }

    let start = nonterminal_name(&h.start, &IType::State(q), m);
    let hors = Hors {
        terminals: ex.terminals,
        nonterminals: ex.nonterminals,
        rules: ex.rules,
        start,
    };
    let diags = check_wellformed(&hors);
    if !diags.is_empty() {
        let text: Vec<String> = diags.iter().map(|d| d.to_string()).collect();
        return Err(SelectError::Internal(text.join("; ")));
    }
    Ok(AnnotatedHors {
        hors,
        state: q,
        terminals: ex.labels,
        nonterminals: ex.names,
    })
}

struct Extractor<'a> {
    m: &'a Apt,
    terminals: IndexMap<String, usize>,
    nonterminals: IndexMap<String, SimpleType>,
    rules: IndexMap<String, Rule>,
    labels: BTreeMap<String, TerminalLabel>,
    names: BTreeMap<String, (String, IType)>,
    casts: HashMap<(IType, IType), String>,
}

/// Argument sets of every arrow level and the final state.
fn uncurry(ty: &IType) -> (Vec<&ColoredSet>, State) {
    let mut sets = Vec::new();
    let mut cur = ty;
    loop {
        match cur {
            IType::Arrow(u, r) => {
                sets.push(u);
                cur = r;
            }
            IType::State(q) => return (sets, *q),
        }
    }
}

fn param(x: &str, j: usize) -> String {
    format!("{}_{}", x, j)
}

impl Extractor<'_> {
    fn rule(&mut self, h: &Hors, f: &str, ty: &IType, delta: &Assumptions) -> Result<(), SelectError> {
        let r = &h.rules[f];
        let (sets, res) = ty
            .split(r.binders.len())
            .ok_or_else(|| SelectError::Internal(format!("{} does not fit `{}`", ty.display(self.m), f)))?;
        // nonterminals the clause choice never reads stay bound to the empty set
        let mut env: TypeEnv = h
            .nonterminals
            .keys()
            .map(|g| (Name::NonTerminal(g.clone()), delta.get(g).cloned().unwrap_or_else(ColoredSet::empty)))
            .collect();
        let mut binders = Vec::new();
        let mut params = BTreeMap::new();
        for ((x, _), u) in r.binders.iter().zip(&sets) {
            env.insert(Name::Var(x.clone()), (*u).clone());
            params.insert(x.clone(), (*u).clone());
            for (j, (_, b)) in u.iter().enumerate() {
                binders.push((param(x, j), annotated_sort(b)));
            }
        }
        let d = derive(&env, &r.body, res, &h.terminals, self.m)
            .map_err(|e| SelectError::Internal(e.to_string()))?
            .ok_or_else(|| SelectError::Internal(format!("chosen assumptions do not type `{}`", f)))?;
        let body = self.term(&d, Color::Eps, &params, delta)?;
        let name = nonterminal_name(f, ty, self.m);
        self.names.insert(name.clone(), (f.to_string(), ty.clone()));
        self.nonterminals.insert(name.clone(), annotated_sort(ty));
        self.rules.insert(name, Rule { binders, body });
        Ok(())
    }

    /// Translates a derivation proved under accumulated color `k`.
    fn term(
        &mut self,
        d: &Derivation,
        k: Color,
        params: &BTreeMap<String, ColoredSet>,
        delta: &Assumptions,
    ) -> Result<Term, SelectError> {
        let missing = |what: String| SelectError::Internal(format!("{} is not among the assumptions", what));
        match &d.step {
            Step::Ax { entry } => {
                let head = match &d.term {
                    Term::Var(x) => {
                        let j = params
                            .get(x)
                            .and_then(|u| u.iter().position(|(c, t)| *c == k && t == entry))
                            .ok_or_else(|| missing(x.clone()))?;
                        Term::var(param(x, j))
                    }
                    Term::NonTerminal(g) => {
                        if !delta.get(g).is_some_and(|u| u.contains(k, entry)) {
                            return Err(missing(g.clone()));
                        }
                        Term::nonterminal(nonterminal_name(g, entry, self.m))
                    }
                    other => return Err(SelectError::Internal(format!("axiom on `{}`", other))),
                };
                Ok(self.cast(head, entry, &d.ty))
            }
            Step::Delta => {
                let Term::Terminal(a) = &d.term else {
                    return Err(SelectError::Internal(format!("terminal rule on `{}`", d.term)));
                };
                let (sets, q) = uncurry(&d.ty);
                let m = self.m;
                let fits = |clause: &&crate::automata::Clause| {
                    clause
                        .iter()
                        .all(|&(k, p)| sets.get(k - 1).is_some_and(|u| u.contains(m.color(p), &IType::State(p))))
                };
                let clause = m
                    .clauses(q, a)
                    .iter()
                    .find(fits)
                    .ok_or_else(|| SelectError::Internal(format!("no clause of ({}, {}) fits", m.name(q), a)))?;
                let mut profile: ColoredProfile = vec![BTreeSet::new(); sets.len()];
                for &(k, p) in clause {
                    profile[k - 1].insert((m.color(p), p));
                }
                let exact = IType::arrows(
                    profile
                        .iter()
                        .map(|s| ColoredSet::new(s.iter().map(|&(c, p)| (c, IType::State(p))))),
                    IType::State(q),
                );
                let label = TerminalLabel {
                    symbol: a.clone(),
                    profile,
                    state: q,
                };
                let name = label.name(m);
                self.terminals.insert(name.clone(), label.arity());
                self.labels.insert(name.clone(), label);
                Ok(self.cast(Term::terminal(name), &exact, &d.ty))
            }
            Step::App { fun, args } => {
                let mut t = self.term(fun, k, params, delta)?;
                let IType::Arrow(u, _) = &fun.ty else {
                    return Err(SelectError::Internal(format!("`{}` is applied at a state", fun.term)));
                };
                for (c, b) in u.iter() {
                    let (_, arg) = args
                        .iter()
                        .find(|(c2, a)| c2 == c && a.ty == *b)
                        .ok_or_else(|| SelectError::Internal(format!("no premise for {}.{}", c, b.display(self.m))))?;
                    t = Term::app(t, self.term(arg, k.max(*c), params, delta)?);
                }
                Ok(t)
            }
            Step::Lambda { .. } => Err(SelectError::Internal("abstraction in a rule body".into())),
        }
    }

    /// Uses a term of type `from` at a type `to ≤ from`.
    fn cast(&mut self, t: Term, from: &IType, to: &IType) -> Term {
        if from == to {
            return t;
        }
        Term::app(Term::nonterminal(self.cast_nt(from, to)), t)
    }

    /// `Cast_i f ys = f (ys cast pairwise)`: each pair of `from` takes the
    /// first pair of `to` of the same color above it.
    fn cast_nt(&mut self, from: &IType, to: &IType) -> String {
        let key = (from.clone(), to.clone());
        if let Some(n) = self.casts.get(&key) {
            return n.clone();
        }
        let name = format!("Cast_{}", self.casts.len());
        self.casts.insert(key, name.clone());
        let (fsets, _) = uncurry(from);
        let (tsets, _) = uncurry(to);
        let mut binders = vec![("f".to_string(), annotated_sort(from))];
        for (i, u) in tsets.iter().enumerate() {
            for (j, (_, b)) in u.iter().enumerate() {
                binders.push((format!("y{}_{}", i, j), annotated_sort(b)));
            }
        }
        let mut body = Term::var("f");
        for (i, (fu, tu)) in fsets.iter().zip(&tsets).enumerate() {
            for (c, need) in fu.iter() {
                let (j, (_, have)) = tu
                    .iter()
                    .enumerate()
                    .find(|(_, (c2, have))| c2 == c && need.le(have))
                    .expect("cast targets a subtype");
                let arg = self.cast(Term::var(format!("y{}_{}", i, j)), have, need);
                body = Term::app(body, arg);
            }
        }
        let sort = SimpleType::arrow(annotated_sort(from), annotated_sort(to));
        self.nonterminals.insert(name.clone(), sort);
        self.rules.insert(name.clone(), Rule { binders, body });
        name
    }
}
