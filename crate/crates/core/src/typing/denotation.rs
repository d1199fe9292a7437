use super::{Name, TypeEnv};
use crate::automata::{Apt, Color};
use crate::itypes::{is_terminal_type, ColoredSet, IType, ITypeError, TypeSpace};
use crate::syntax::{SimpleType, SortError, Term};
use indexmap::IndexMap;
use std::collections::BTreeMap;

/// A context that suffices for one type; every context above it does too.
pub type Witness = TypeEnv;

/// The relation `{(Γ, α) | Γ ⊢ t : α}` of a term, computed rule by rule with
/// literal context unions. Each type keeps its minimal witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Denotation {
    pub sort: SimpleType,
    table: BTreeMap<IType, Vec<Witness>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DenotationError {
    #[error(transparent)]
    Size(#[from] ITypeError),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("`{0}` has no sort")]
    Unsorted(String),
    #[error("fixpoints are not supported: {0}")]
    Fix(String),
}

impl Denotation {
    pub fn contains(&self, env: &TypeEnv, ty: &IType) -> bool {
        self.table.get(ty).is_some_and(|ws| ws.iter().any(|w| w.le(env)))
    }

    pub fn witnesses(&self, ty: &IType) -> &[Witness] {
        self.table.get(ty).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Types with at least one witness.
    pub fn types(&self) -> impl Iterator<Item = &IType> {
        self.table.keys()
    }
}

/// Computes the denotation of `t` with free names sorted by `sorts`.
pub fn denotation(
    t: &Term,
    sorts: &BTreeMap<Name, SimpleType>,
    terminals: &IndexMap<String, usize>,
    m: &Apt,
    space: &TypeSpace,
) -> Result<Denotation, DenotationError> {
    let mut scope: Vec<(Name, SimpleType)> = sorts.iter().map(|(n, s)| (n.clone(), s.clone())).collect();
    let (sort, table) = go(t, &mut scope, terminals, m, space)?;
    Ok(Denotation { sort, table })
}

type Table = BTreeMap<IType, Vec<Witness>>;

fn go(
    t: &Term,
    scope: &mut Vec<(Name, SimpleType)>,
    terminals: &IndexMap<String, usize>,
    m: &Apt,
    space: &TypeSpace,
) -> Result<(SimpleType, Table), DenotationError> {
    let mut table = Table::new();
    match t {
        Term::Var(_) | Term::NonTerminal(_) => {
            let name = Name::of(t).unwrap();
            let sort = scope
                .iter()
                .rev()
                .find(|(n, _)| *n == name)
                .map(|(_, s)| s.clone())
                .ok_or_else(|| DenotationError::Unsorted(t.to_string()))?;
            for a in space.enumerate(&sort)?.iter() {
                let w = TypeEnv::singleton(name.clone(), ColoredSet::new([(Color::Eps, a.clone())]));
                table.insert(a.clone(), vec![w]);
            }
            Ok((sort, table))
        }
        Term::Terminal(a) => {
            let n = *terminals.get(a).ok_or_else(|| DenotationError::Unsorted(a.clone()))?;
            let sort = SimpleType::first_order(n);
            for ty in space.enumerate(&sort)?.iter() {
                if is_terminal_type(a, n, ty, m)? {
                    table.insert(ty.clone(), vec![TypeEnv::new()]);
                }
            }
            Ok((sort, table))
        }
        Term::App(f, x) => {
            let (fs, ft) = go(f, scope, terminals, m, space)?;
            let (xs, xt) = go(x, scope, terminals, m, space)?;
            let SimpleType::Arrow(dom, cod) = &fs else {
                return Err(SortError::NotAFunction { fun: f.to_string(), sort: fs.clone() }.into());
            };
            if **dom != xs {
                return Err(SortError::ArgumentMismatch {
                    arg: x.to_string(),
                    expected: (**dom).clone(),
                    found: xs,
                }
                .into());
            }
            for (fty, ws0) in &ft {
                let IType::Arrow(u, alpha) = fty else { unreachable!() };
                let mut acc = ws0.clone();
                for (c, beta) in u {
                    let Some(wsi) = xt.get(beta) else {
                        acc.clear();
                        break;
                    };
                    let mut next = Vec::new();
                    for w in &acc {
                        for wi in wsi {
                            next.push(w.union(&wi.boxed(*c)));
                        }
                    }
                    acc = minimize(next);
                }
                if !acc.is_empty() {
                    let slot = table.entry((**alpha).clone()).or_default();
                    slot.extend(acc);
                    *slot = minimize(std::mem::take(slot));
                }
            }
            Ok(((**cod).clone(), table))
        }
        Term::Lambda { binder, sort, body } => {
            let x = Name::Var(binder.clone());
            scope.push((x.clone(), sort.clone()));
            let inner = go(body, scope, terminals, m, space);
            scope.pop();
            let (bs, bt) = inner?;
            let whole = SimpleType::arrow(sort.clone(), bs);
            for ty in space.enumerate(&whole)?.iter() {
                let IType::Arrow(u, beta) = ty else { unreachable!() };
                let Some(ws) = bt.get(beta.as_ref()) else { continue };
                let empty = ColoredSet::empty();
                let kept: Vec<Witness> = ws
                    .iter()
                    .filter(|w| w.get(&x).unwrap_or(&empty).le(u))
                    .map(|w| {
                        let mut w = w.clone();
                        w.remove(&x);
                        w
                    })
                    .collect();
                if !kept.is_empty() {
                    table.insert(ty.clone(), minimize(kept));
                }
            }
            Ok((whole, table))
        }
        Term::Fix { .. } => Err(DenotationError::Fix(t.to_string())),
    }
}

/// Drops witnesses above another one; among equivalent ones the first stays.
fn minimize(ws: Vec<Witness>) -> Vec<Witness> {
    let mut out: Vec<Witness> = Vec::new();
    for (i, w) in ws.iter().enumerate() {
        let dominated = ws
            .iter()
            .enumerate()
            .any(|(j, v)| j != i && v.le(w) && (!w.le(v) || j < i));
        if !dominated {
            out.push(w.clone());
        }
    }
    out
}
