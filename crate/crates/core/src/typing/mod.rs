//! The colored intersection type system on applicative terms.
//!
//! `derive` searches backwards from the head of each application spine and
//! threads the color accumulated along argument positions instead of splitting
//! contexts: an axiom on `x` reached under accumulated color `k` needs a pair
//! `(k, α')` in `env(x)`. Each returned node records its minimal literal context.

mod denotation;

pub use denotation::{denotation, Denotation, Witness};

use crate::automata::{Apt, Color};
use crate::itypes::{box_color, is_terminal_type, ColoredSet, IType};
use crate::syntax::Term;
use indexmap::IndexMap;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

/// A name in a typing context.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Name {
    Var(String),
    NonTerminal(String),
}

impl Name {
    pub fn of(t: &Term) -> Option<Name> {
        match t {
            Term::Var(x) => Some(Name::Var(x.clone())),
            Term::NonTerminal(f) => Some(Name::NonTerminal(f.clone())),
            _ => None,
        }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Name::Var(x) | Name::NonTerminal(x) => write!(f, "{}", x),
        }
    }
}

/// Colored sets assigned to names. Names bound to `∅` compare equal to absent ones.
#[derive(Debug, Clone, Default)]
pub struct TypeEnv(BTreeMap<Name, ColoredSet>);

impl TypeEnv {
    pub fn new() -> TypeEnv {
        TypeEnv::default()
    }

    pub fn singleton(name: Name, u: ColoredSet) -> TypeEnv {
        let mut e = TypeEnv::new();
        e.insert(name, u);
        e
    }

    pub fn insert(&mut self, name: Name, u: ColoredSet) {
        self.0.insert(name, u);
    }

    pub fn get(&self, name: &Name) -> Option<&ColoredSet> {
        self.0.get(name)
    }

    pub fn binds(&self, name: &Name) -> bool {
        self.0.contains_key(name)
    }

    pub fn remove(&mut self, name: &Name) -> Option<ColoredSet> {
        self.0.remove(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &ColoredSet)> {
        self.0.iter()
    }

    pub fn union(&self, other: &TypeEnv) -> TypeEnv {
        let mut out = self.clone();
        for (n, u) in &other.0 {
            let merged = match out.0.get(n) {
                Some(v) => v.union(u),
                None => u.clone(),
            };
            out.0.insert(n.clone(), merged);
        }
        out
    }

    /// `□_c Γ`.
    pub fn boxed(&self, c: Color) -> TypeEnv {
        TypeEnv(self.0.iter().map(|(n, u)| (n.clone(), box_color(c, u))).collect())
    }

    /// Pointwise order: every name's set is below its set in `other`.
    pub fn le(&self, other: &TypeEnv) -> bool {
        let empty = ColoredSet::empty();
        self.0
            .iter()
            .all(|(n, u)| u.le(other.0.get(n).unwrap_or(&empty)))
    }

    fn nonempty(&self) -> impl Iterator<Item = (&Name, &ColoredSet)> {
        self.0.iter().filter(|(_, u)| !u.is_empty())
    }
}

impl PartialEq for TypeEnv {
    fn eq(&self, other: &TypeEnv) -> bool {
        self.nonempty().eq(other.nonempty())
    }
}

impl Eq for TypeEnv {}

impl FromIterator<(Name, ColoredSet)> for TypeEnv {
    fn from_iter<I: IntoIterator<Item = (Name, ColoredSet)>>(iter: I) -> Self {
        TypeEnv(iter.into_iter().collect())
    }
}

/// The rule concluding a derivation node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// `x : {(ε, entry)} ⊢ x : ty` with `ty ≤ entry`.
    Ax { entry: IType },
    /// `∅ ⊢ a : ty` for a terminal type `ty`.
    Delta,
    /// The function premise has type `{(c_i, β_i)} -> ty`; one argument premise per pair.
    App {
        fun: Arc<Derivation>,
        args: Vec<(Color, Arc<Derivation>)>,
    },
    Lambda { body: Arc<Derivation> },
}

/// A sequent `context ⊢ term : ty` with the rule proving it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub context: TypeEnv,
    pub term: Term,
    pub ty: IType,
    pub step: Step,
}

impl Derivation {
    pub fn size(&self) -> usize {
        1 + match &self.step {
            Step::Ax { .. } | Step::Delta => 0,
            Step::App { fun, args } => fun.size() + args.iter().map(|(_, d)| d.size()).sum::<usize>(),
            Step::Lambda { body } => body.size(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DeriveError {
    #[error("`{0}` is not bound in the environment")]
    Unbound(String),
    #[error("unknown terminal `{0}`")]
    UnknownTerminal(String),
    #[error("abstraction or fixpoint below an application: {0}")]
    Unsupported(String),
}

/// Derives `env ⊢ t : target`, or `None` when the sequent is not provable.
pub fn derive(
    env: &TypeEnv,
    t: &Term,
    target: &IType,
    terminals: &IndexMap<String, usize>,
    m: &Apt,
) -> Result<Option<Derivation>, DeriveError> {
    let mut env = env.clone();
    let mut binders = Vec::new();
    let mut body = t;
    let mut ty = target;
    while let Term::Lambda { binder, body: b, .. } = body {
        let IType::Arrow(u, r) = ty else {
            return Ok(None);
        };
        env.insert(Name::Var(binder.clone()), u.clone());
        binders.push((binder.clone(), u.clone(), ty.clone()));
        body = b;
        ty = r;
    }
    check_scope(&env, terminals, body)?;
    let mut search = Search {
        env: &env,
        terminals,
        m,
        memo: HashMap::new(),
    };
    let Some(mut d) = search.at(Color::Eps, body, ty) else {
        return Ok(None);
    };
    for ((binder, _, lam_ty), lam) in binders.iter().rev().zip(lambda_spine(t).into_iter().rev()) {
        let mut context = d.context.clone();
        context.remove(&Name::Var(binder.clone()));
        d = Arc::new(Derivation {
            context,
            term: lam.clone(),
            ty: lam_ty.clone(),
            step: Step::Lambda { body: d },
        });
    }
    Ok(Some(Arc::unwrap_or_clone(d)))
}

fn check_scope(env: &TypeEnv, terminals: &IndexMap<String, usize>, t: &Term) -> Result<(), DeriveError> {
    match t {
        Term::Var(_) | Term::NonTerminal(_) => {
            if env.binds(&Name::of(t).unwrap()) {
                Ok(())
            } else {
                Err(DeriveError::Unbound(t.to_string()))
            }
        }
        Term::Terminal(a) => {
            if terminals.contains_key(a) {
                Ok(())
            } else {
                Err(DeriveError::UnknownTerminal(a.clone()))
            }
        }
        Term::App(f, a) => {
            check_scope(env, terminals, f)?;
            check_scope(env, terminals, a)
        }
        Term::Lambda { .. } | Term::Fix { .. } => Err(DeriveError::Unsupported(t.to_string())),
    }
}

/// The leading abstractions of `t`, outermost first.
fn lambda_spine(t: &Term) -> Vec<&Term> {
    let mut out = Vec::new();
    let mut cur = t;
    while let Term::Lambda { body, .. } = cur {
        out.push(cur);
        cur = body;
    }
    out
}

type Memo = HashMap<(Color, *const Term, IType), Option<Arc<Derivation>>>;

struct Search<'a> {
    env: &'a TypeEnv,
    terminals: &'a IndexMap<String, usize>,
    m: &'a Apt,
    memo: Memo,
}

impl Search<'_> {
    fn at(&mut self, k: Color, t: &Term, target: &IType) -> Option<Arc<Derivation>> {
        let key = (k, t as *const Term, target.clone());
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let (head, args) = t.spine();
        let found = match head {
            Term::Var(_) | Term::NonTerminal(_) => self.named(k, head, &args, target),
            Term::Terminal(a) => self.terminal(k, head, a, &args, target),
            _ => None,
        };
        self.memo.insert(key, found.clone());
        found
    }

    fn named(&mut self, k: Color, head: &Term, args: &[&Term], target: &IType) -> Option<Arc<Derivation>> {
        let name = Name::of(head).unwrap();
        let entries = self.env.get(&name)?.clone();
        'entries: for (c, entry) in &entries {
            if *c != k {
                continue;
            }
            let Some((sets, rest)) = entry.split(args.len()) else {
                continue;
            };
            if !target.le(rest) {
                continue;
            }
            let mut premises = Vec::with_capacity(args.len());
            for (u, arg) in sets.iter().zip(args) {
                let mut ps = Vec::with_capacity(u.len());
                for (ci, beta) in u.iter() {
                    match self.at(k.max(*ci), arg, beta) {
                        Some(d) => ps.push((*ci, d)),
                        None => continue 'entries,
                    }
                }
                premises.push(ps);
            }
            let ty = IType::arrows(sets.iter().map(|u| (*u).clone()), target.clone());
            let leaf = Derivation {
                context: TypeEnv::singleton(name.clone(), ColoredSet::new([(Color::Eps, entry.clone())])),
                term: head.clone(),
                ty,
                step: Step::Ax { entry: entry.clone() },
            };
            return Some(apply_spine(leaf, args, premises));
        }
        None
    }

    fn terminal(&mut self, k: Color, head: &Term, a: &str, args: &[&Term], target: &IType) -> Option<Arc<Derivation>> {
        let n = *self.terminals.get(a)?;
        let m = args.len();
        let (open, res) = target.split(n.checked_sub(m)?)?;
        let q = res.as_state()?;
        'clauses: for clause in self.m.clauses(q, a) {
            for &(d, p) in clause {
                if d > m && !open[d - m - 1].contains(self.m.color(p), &IType::State(p)) {
                    continue 'clauses;
                }
            }
            let mut premises: Vec<Vec<(Color, Arc<Derivation>)>> = vec![Vec::new(); m];
            for &(d, p) in clause.iter().filter(|(d, _)| *d <= m) {
                let c = self.m.color(p);
                match self.at(k.max(c), args[d - 1], &IType::State(p)) {
                    Some(der) => premises[d - 1].push((c, der)),
                    None => continue 'clauses,
                }
            }
            let applied = premises
                .iter()
                .map(|ps| ColoredSet::new(ps.iter().map(|(c, d)| (*c, d.ty.clone()))));
            let ty = IType::arrows(applied, target.clone());
            let leaf = Derivation {
                context: TypeEnv::new(),
                term: head.clone(),
                ty,
                step: Step::Delta,
            };
            return Some(apply_spine(leaf, args, premises));
        }
        None
    }
}

/// Stacks application nodes over a head derivation.
fn apply_spine(head: Derivation, args: &[&Term], premises: Vec<Vec<(Color, Arc<Derivation>)>>) -> Arc<Derivation> {
    let mut cur = Arc::new(head);
    for (arg, ps) in args.iter().zip(premises) {
        let IType::Arrow(_, result) = &cur.ty else {
            unreachable!("head type has an arrow per argument")
        };
        let mut context = cur.context.clone();
        for (c, d) in &ps {
            context = context.union(&d.context.boxed(*c));
        }
        let term = Term::app(cur.term.clone(), (*arg).clone());
        let ty = result.as_ref().clone();
        cur = Arc::new(Derivation {
            context,
            term,
            ty,
            step: Step::App { fun: cur, args: ps },
        });
    }
    cur
}

/// Independent check that every node follows its rule and that the root
/// context is below `env`.
pub fn check_derivation(
    d: &Derivation,
    env: &TypeEnv,
    terminals: &IndexMap<String, usize>,
    m: &Apt,
) -> Result<(), String> {
    check_node(d, terminals, m)?;
    if !d.context.le(env) {
        return Err(format!("root context of `{}` exceeds the environment", d.term));
    }
    Ok(())
}

fn check_node(d: &Derivation, terminals: &IndexMap<String, usize>, m: &Apt) -> Result<(), String> {
    let fail = |why: &str| Err(format!("at `{}`: {}", d.term, why));
    match &d.step {
        Step::Ax { entry } => {
            let Some(name) = Name::of(&d.term) else {
                return fail("axiom on a non-name");
            };
            if d.context != TypeEnv::singleton(name, ColoredSet::new([(Color::Eps, entry.clone())])) {
                return fail("axiom context is not {(e, entry)}");
            }
            if !d.ty.le(entry) {
                return fail("type is not below the assumption");
            }
        }
        Step::Delta => {
            let Term::Terminal(a) = &d.term else {
                return fail("delta rule on a non-terminal");
            };
            let Some(&n) = terminals.get(a) else {
                return fail("unknown terminal");
            };
            if d.context != TypeEnv::new() {
                return fail("delta context is not empty");
            }
            if is_terminal_type(a, n, &d.ty, m) != Ok(true) {
                return fail("type is not in the terminal's denotation");
            }
        }
        Step::App { fun, args } => {
            let Term::App(f, a) = &d.term else {
                return fail("application rule on a non-application");
            };
            if fun.term != **f || args.iter().any(|(_, p)| p.term != **a) {
                return fail("premise terms do not match");
            }
            let u = ColoredSet::new(args.iter().map(|(c, p)| (*c, p.ty.clone())));
            if fun.ty != IType::arrow(u, d.ty.clone()) {
                return fail("function premise type is not {(c_i, b_i)} -> ty");
            }
            let mut ctx = fun.context.clone();
            for (c, p) in args {
                ctx = ctx.union(&p.context.boxed(*c));
            }
            if ctx != d.context {
                return fail("context is not the colored union of the premises");
            }
            check_node(fun, terminals, m)?;
            for (_, p) in args {
                check_node(p, terminals, m)?;
            }
        }
        Step::Lambda { body } => {
            let Term::Lambda { binder, body: b, .. } = &d.term else {
                return fail("abstraction rule on a non-abstraction");
            };
            let IType::Arrow(u, r) = &d.ty else {
                return fail("abstraction typed by a state");
            };
            if body.term != **b || body.ty != **r {
                return fail("premise does not match");
            }
            let x = Name::Var(binder.clone());
            let used = body.context.get(&x).cloned().unwrap_or_default();
            if !used.le(u) {
                return fail("bound variable used beyond its colored set");
            }
            let mut ctx = body.context.clone();
            ctx.remove(&x);
            if ctx != d.context {
                return fail("context does not drop the bound variable");
            }
            check_node(body, terminals, m)?;
        }
    }
    Ok(())
}
