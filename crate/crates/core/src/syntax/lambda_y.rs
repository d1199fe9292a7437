//! Translations between recursion schemes and closed λY-terms.

use super::{check_wellformed, Diagnostic, Hors, Rule, Signature, SimpleType, SortError, Term, TreePrefix};
use indexmap::IndexMap;
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LambdaYError {
    #[error("scheme is not well-formed: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    IllFormed(Vec<Diagnostic>),
    #[error("ill-sorted term: {0}")]
    IllSorted(#[from] SortError),
    #[error("term has sort {0}, expected o")]
    NotGround(SimpleType),
    #[error("term is not closed: free variable `{0}`")]
    Open(String),
    #[error("head normalization did not converge within {0} steps")]
    Budget(usize),
}

/// Closed λY-term for the scheme's start symbol. Nonterminals are eliminated
/// one at a time, in declaration order, each becoming a fixpoint that is
/// substituted into the remaining equations.
pub fn to_lambda_y(h: &Hors) -> Result<Term, LambdaYError> {
    let diags = check_wellformed(h);
    if !diags.is_empty() {
        return Err(LambdaYError::IllFormed(diags));
    }
    let mut taken: HashSet<String> = HashSet::new();
    for r in h.rules.values() {
        taken.extend(r.binders.iter().map(|(b, _)| b.clone()));
    }

    let order: Vec<&String> = h.nonterminals.keys().collect();
    let mut defs: Vec<Term> = order
        .iter()
        .map(|f| {
            let r = &h.rules[f.as_str()];
            r.binders
                .iter()
                .rev()
                .fold(r.body.clone(), |acc, (b, s)| Term::lambda(b.clone(), s.clone(), acc))
        })
        .collect();

    // forward elimination
    let mut solved: Vec<Term> = Vec::with_capacity(order.len());
    for i in 0..order.len() {
        let f = order[i];
        let sort = h.nonterminals[f.as_str()].clone();
        let rv = fresh(&format!("{}_rec", f.to_lowercase()), &mut taken);
        let body = defs[i].subst_nonterminals(&|n| (n == f.as_str()).then(|| Term::var(rv.clone())));
        let fix = Term::fix(sort.clone(), Term::lambda(rv, sort, body));
        for def in defs.iter_mut().skip(i + 1) {
            *def = def.subst_nonterminals(&|n| (n == f.as_str()).then(|| fix.clone()));
        }
        solved.push(fix);
    }

    // back substitution: solved[i] only mentions nonterminals after i
    let mut closed: IndexMap<&str, Term> = IndexMap::new();
    for i in (0..order.len()).rev() {
        let t = solved[i].subst_nonterminals(&|n| closed.get(n).cloned());
        closed.insert(order[i].as_str(), t);
    }
    Ok(closed.swap_remove(h.start.as_str()).expect("start is declared"))
}

/// λ-lifting: every abstraction and every fixpoint becomes a nonterminal
/// parameterized by its free variables.
pub fn from_lambda_y(t: &Term, terminals: &IndexMap<String, usize>) -> Result<Hors, LambdaYError> {
    let sig = Signature {
        terminals,
        nonterminals: None,
    };
    if let Some(x) = t.free_vars().into_iter().next() {
        return Err(LambdaYError::Open(x));
    }
    let sort = sig.sort_of(t, &mut Vec::new())?;
    if !sort.is_ground() {
        return Err(LambdaYError::NotGround(sort));
    }
    let mut taken: HashSet<String> = terminals.keys().cloned().collect();
    let t = uniquify(t, &mut taken, &mut Vec::new());
    let start = fresh("S", &mut taken);
    let mut lifter = Lifter {
        sig,
        taken,
        nonterminals: IndexMap::new(),
        rules: IndexMap::new(),
        counter: 0,
    };
    lifter.nonterminals.insert(start.clone(), SimpleType::Ground);
    lifter.rules.insert(
        start.clone(),
        Rule {
            binders: Vec::new(),
            body: Term::Var(String::new()),
        },
    );
    let body = lifter.lift(&t, &mut Vec::new())?;
    lifter.rules[&start].body = body;
    Ok(Hors {
        terminals: terminals.clone(),
        nonterminals: lifter.nonterminals,
        rules: lifter.rules,
        start,
    })
}

fn fresh(base: &str, taken: &mut HashSet<String>) -> String {
    let mut name = base.to_string();
    let mut i = 1;
    while taken.contains(&name) {
        name = format!("{}{}", base, i);
        i += 1;
    }
    taken.insert(name.clone());
    name
}

/// Renames binders so that every binder in the term is distinct from every
/// other binder and from every name in `taken`.
fn uniquify(t: &Term, taken: &mut HashSet<String>, scope: &mut Vec<(String, String)>) -> Term {
    match t {
        Term::Var(x) => Term::Var(
            scope
                .iter()
                .rev()
                .find(|(o, _)| o == x)
                .map(|(_, n)| n.clone())
                .unwrap_or_else(|| x.clone()),
        ),
        Term::Terminal(_) | Term::NonTerminal(_) => t.clone(),
        Term::App(f, a) => Term::app(uniquify(f, taken, scope), uniquify(a, taken, scope)),
        Term::Lambda { binder, sort, body } => {
            let n = fresh(binder, taken);
            scope.push((binder.clone(), n.clone()));
            let body = uniquify(body, taken, scope);
            scope.pop();
            Term::lambda(n, sort.clone(), body)
        }
        Term::Fix { sort, body } => Term::fix(sort.clone(), uniquify(body, taken, scope)),
    }
}

struct Lifter<'a> {
    sig: Signature<'a>,
    taken: HashSet<String>,
    nonterminals: IndexMap<String, SimpleType>,
    rules: IndexMap<String, Rule>,
    counter: usize,
}

impl Lifter<'_> {
    fn sort(&self, t: &Term, scope: &[(String, SimpleType)]) -> Result<SimpleType, LambdaYError> {
        let sig = Signature {
            terminals: self.sig.terminals,
            nonterminals: Some(&self.nonterminals),
        };
        Ok(sig.sort_of(t, &mut scope.to_vec())?)
    }

    fn new_nonterminal(&mut self, prefix: &str) -> String {
        loop {
            self.counter += 1;
            let name = format!("{}{}", prefix, self.counter);
            if !self.taken.contains(&name) {
                self.taken.insert(name.clone());
                return name;
            }
        }
    }

    fn free_with_sorts(&self, t: &Term, scope: &[(String, SimpleType)]) -> Vec<(String, SimpleType)> {
        t.free_vars()
            .into_iter()
            .map(|x| {
                let s = scope.iter().rev().find(|(n, _)| *n == x).expect("bound").1.clone();
                (x, s)
            })
            .collect()
    }

    fn eta_params(&mut self, sort: &SimpleType) -> Vec<(String, SimpleType)> {
        sort.domains()
            .into_iter()
            .map(|d| (fresh("w", &mut self.taken), d.clone()))
            .collect()
    }

    fn declare(&mut self, name: &str, params: &[(String, SimpleType)], body: Term) {
        let sort = SimpleType::from_parts(params.iter().map(|(_, s)| s.clone()), SimpleType::Ground);
        self.nonterminals.insert(name.to_string(), sort);
        self.rules.insert(
            name.to_string(),
            Rule {
                binders: params.to_vec(),
                body,
            },
        );
    }

    fn lift(&mut self, t: &Term, scope: &mut Vec<(String, SimpleType)>) -> Result<Term, LambdaYError> {
        match t {
            Term::Var(_) | Term::Terminal(_) | Term::NonTerminal(_) => Ok(t.clone()),
            Term::App(f, a) => Ok(Term::app(self.lift(f, scope)?, self.lift(a, scope)?)),
            Term::Lambda { .. } => {
                let free = self.free_with_sorts(t, scope);
                let mut binders = Vec::new();
                let mut inner = t;
                while let Term::Lambda { binder, sort, body } = inner {
                    binders.push((binder.clone(), sort.clone()));
                    inner = body;
                }
                let mut inner_scope = scope.clone();
                inner_scope.extend(binders.iter().cloned());
                let rest = self.sort(inner, &inner_scope)?;
                let name = self.new_nonterminal("Lam");
                let eta = self.eta_params(&rest);
                let params: Vec<_> = free.iter().chain(&binders).chain(&eta).cloned().collect();
                // declare before lifting the body so recursive sorting sees it
                self.declare(&name, &params, Term::Var(String::new()));
                let applied = Term::apps(inner.clone(), eta.iter().map(|(w, _)| Term::var(w.clone())));
                let mut body_scope = params.clone();
                let body = self.lift(&applied, &mut body_scope)?;
                self.rules[&name].body = body;
                Ok(Term::apps(Term::NonTerminal(name), free.iter().map(|(x, _)| Term::var(x.clone()))))
            }
            Term::Fix { sort, body } => {
                let free = self.free_with_sorts(t, scope);
                let name = self.new_nonterminal("Fix");
                let eta = self.eta_params(sort);
                let params: Vec<_> = free.iter().chain(&eta).cloned().collect();
                self.declare(&name, &params, Term::Var(String::new()));
                let me = Term::apps(Term::NonTerminal(name.clone()), free.iter().map(|(x, _)| Term::var(x.clone())));
                // Y (λx. B) unfolds to B[x := Y (λx. B)]; reuse the nonterminal for the recursive call
                let unrolled = match body.as_ref() {
                    Term::Lambda { binder, body: inner, .. } => {
                        let b = inner.subst_vars(&|v| (v == binder).then(|| me.clone()));
                        // absorb leading λs into the eta parameters
                        let mut cur = b;
                        let mut used = 0;
                        while used < eta.len() {
                            match cur {
                                Term::Lambda { binder, body, .. } => {
                                    let w = eta[used].0.clone();
                                    cur = body.subst_vars(&|v| (v == binder).then(|| Term::var(w.clone())));
                                    used += 1;
                                }
                                other => {
                                    cur = other;
                                    break;
                                }
                            }
                        }
                        Term::apps(cur, eta[used..].iter().map(|(w, _)| Term::var(w.clone())))
                    }
                    other => Term::apps(
                        Term::app(other.clone(), me.clone()),
                        eta.iter().map(|(w, _)| Term::var(w.clone())),
                    ),
                };
                let mut body_scope = params.clone();
                let lifted = self.lift(&unrolled, &mut body_scope)?;
                self.rules[&name].body = lifted;
                Ok(me)
            }
        }
    }
}

/// Böhm-tree prefix of a closed ground λY-term by weak head reduction
/// (β and `Y M -> M (Y M)`). The step budget applies per node.
pub fn bohm_prefix(t: &Term, depth: usize, budget: usize) -> Result<TreePrefix, LambdaYError> {
    if let Some(x) = t.free_vars().into_iter().next() {
        return Err(LambdaYError::Open(x));
    }
    if depth == 0 {
        return Ok(TreePrefix::Bottom);
    }
    let mut cur = t.clone();
    for _ in 0..=budget {
        let (head, args) = cur.spine();
        match head {
            Term::Terminal(a) => {
                let children = args
                    .into_iter()
                    .map(|a| bohm_prefix(a, depth - 1, budget))
                    .collect::<Result<Vec<_>, _>>()?;
                return Ok(TreePrefix::node(a.clone(), children));
            }
            Term::Lambda { binder, body, .. } if !args.is_empty() => {
                // arguments of a closed term in head position are closed
                let arg = args[0].clone();
                let reduced = body.subst_vars(&|v| (v == binder).then(|| arg.clone()));
                cur = Term::apps(reduced, args[1..].iter().map(|a| (*a).clone()));
            }
            Term::Fix { body, .. } => {
                let unrolled = Term::app((**body).clone(), head.clone());
                cur = Term::apps(unrolled, args.into_iter().cloned());
            }
            Term::Lambda { .. } => {
                return Err(LambdaYError::NotGround(SimpleType::arrow(SimpleType::Ground, SimpleType::Ground)))
            }
            Term::Var(x) => return Err(LambdaYError::Open(x.clone())),
            Term::NonTerminal(n) => return Err(LambdaYError::IllSorted(SortError::UnknownNonTerminal(n.clone()))),
            Term::App(..) => unreachable!("spine head is never an application"),
        }
    }
    Err(LambdaYError::Budget(budget))
}
