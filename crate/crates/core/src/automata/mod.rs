//! Alternating parity tree automata over a ranked alphabet.

mod formula;

pub use formula::{dnf, Clause, Formula};

use crate::syntax::TreePrefix;
use indexmap::IndexMap;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Index of an automaton state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State(pub u32);

/// A color of `Ω(Q) ⊎ {ε}`. `Eps` sorts below every natural, so `max` treats it as neutral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Color {
    Eps,
    Nat(u32),
}

impl Color {
    /// Game priority: `c + 2` for naturals, `1` for ε. Parity and strict order are preserved.
    pub fn priority(self) -> u32 {
        match self {
            Color::Eps => 1,
            Color::Nat(n) => n + 2,
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Color::Eps => write!(f, "e"),
            Color::Nat(n) => write!(f, "{}", n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AptError {
    #[error("automaton has no states")]
    NoStates,
    #[error("state `{0}` declared twice")]
    DuplicateState(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{0}` has no color")]
    MissingColor(String),
    #[error("transition for ({state}, {symbol}) uses direction {direction} but `{symbol}` has arity {arity}")]
    DirectionOutOfRange {
        state: String,
        symbol: String,
        direction: usize,
        arity: usize,
    },
    #[error("transition on unknown terminal `{0}`")]
    UnknownSymbol(String),
    #[error("profile has {found} components but `{symbol}` has arity {arity}")]
    ArityMismatch { symbol: String, arity: usize, found: usize },
}

/// `(Ω(q'), q')`-style colored states, one set per direction.
pub type ColoredProfile = Vec<BTreeSet<(Color, State)>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Apt {
    names: Vec<String>,
    omega: Vec<u32>,
    initial: State,
    delta: BTreeMap<(State, String), Formula>,
    dnfs: Vec<BTreeMap<String, Vec<Clause>>>,
}

impl Apt {
    /// `states` in declaration order, `colors` by state name, `delta` keyed by
    /// (state name, terminal). Missing transitions mean `false`.
    pub fn new(
        states: &[String],
        initial: &str,
        colors: &IndexMap<String, u32>,
        delta: Vec<((String, String), Formula)>,
    ) -> Result<Apt, AptError> {
        if states.is_empty() {
            return Err(AptError::NoStates);
        }
        let mut names: Vec<String> = Vec::new();
        for s in states {
            if names.contains(s) {
                return Err(AptError::DuplicateState(s.clone()));
            }
            names.push(s.clone());
        }
        let lookup = |n: &str| {
            names
                .iter()
                .position(|x| x == n)
                .map(|i| State(i as u32))
                .ok_or_else(|| AptError::UnknownState(n.to_string()))
        };
        for c in colors.keys() {
            lookup(c)?;
        }
        let omega = names
            .iter()
            .map(|n| colors.get(n).copied().ok_or_else(|| AptError::MissingColor(n.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let initial = lookup(initial)?;
        let mut table = BTreeMap::new();
        for ((q, a), f) in delta {
            let q = lookup(&q)?;
            f.check_states(&|s| s.0 < names.len() as u32)
                .map_err(|s| AptError::UnknownState(format!("#{}", s.0)))?;
            table.insert((q, a), f);
        }
        let mut dnfs = vec![BTreeMap::new(); names.len()];
        for ((q, a), f) in &table {
            dnfs[q.0 as usize].insert(a.clone(), dnf(f));
        }
        Ok(Apt {
            names,
            omega,
            initial,
            delta: table,
            dnfs,
        })
    }

    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        (0..self.names.len() as u32).map(State)
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn initial(&self) -> State {
        self.initial
    }

    pub fn name(&self, q: State) -> &str {
        &self.names[q.0 as usize]
    }

    pub fn state(&self, name: &str) -> Option<State> {
        self.names.iter().position(|n| n == name).map(|i| State(i as u32))
    }

    pub fn omega(&self, q: State) -> u32 {
        self.omega[q.0 as usize]
    }

    pub fn color(&self, q: State) -> Color {
        Color::Nat(self.omega(q))
    }

    pub fn delta(&self, q: State, a: &str) -> Formula {
        self.delta.get(&(q, a.to_string())).cloned().unwrap_or(Formula::False)
    }

    /// Explicitly given transitions in (state, symbol) order.
    pub fn transitions(&self) -> impl Iterator<Item = (State, &str, &Formula)> {
        self.delta.iter().map(|((q, a), f)| (*q, a.as_str(), f))
    }

    /// Clauses of `dnf(δ(q, a))`, cached at construction.
    pub fn clauses(&self, q: State, a: &str) -> &[Clause] {
        self.dnfs[q.0 as usize].get(a).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Directions must be within arity and every symbol must be a terminal.
    pub fn check_alphabet(&self, terminals: &IndexMap<String, usize>) -> Result<(), AptError> {
        for ((q, a), f) in &self.delta {
            let Some(&arity) = terminals.get(a) else {
                return Err(AptError::UnknownSymbol(a.clone()));
            };
            if let Some(d) = f.directions().into_iter().find(|&d| d == 0 || d > arity) {
                return Err(AptError::DirectionOutOfRange {
                    state: self.name(*q).to_string(),
                    symbol: a.clone(),
                    direction: d,
                    arity,
                });
            }
        }
        Ok(())
    }

    pub fn color_set(&self) -> BTreeSet<Color> {
        color_set(self)
    }
}

/// `Ω(Q) ∪ {ε}`.
pub fn color_set(m: &Apt) -> BTreeSet<Color> {
    std::iter::once(Color::Eps)
        .chain(m.omega.iter().map(|&c| Color::Nat(c)))
        .collect()
}

/// Some clause of `dnf(δ(q, a))` has each atom `(k, q')` present in
/// component `k` of the profile with color `Ω(q')`.
pub fn satisfies(alpha: &[BTreeSet<(Color, State)>], q: State, a: &str, arity: usize, m: &Apt) -> Result<bool, AptError> {
    if alpha.len() != arity {
        return Err(AptError::ArityMismatch {
            symbol: a.to_string(),
            arity,
            found: alpha.len(),
        });
    }
    Ok(m.clauses(q, a).iter().any(|c| clause_holds(c, alpha, m)))
}

pub(crate) fn clause_holds(c: &Clause, alpha: &[BTreeSet<(Color, State)>], m: &Apt) -> bool {
    c.iter()
        .all(|&(k, p)| alpha.get(k - 1).is_some_and(|s| s.contains(&(m.color(p), p))))
}

/// Finite-prefix run oracle: chooses a clause at every visited node and
/// accepts at `Bottom`. Parity is not considered.
pub fn run_search(m: &Apt, t: &TreePrefix, q: State) -> bool {
    match t {
        TreePrefix::Bottom => true,
        TreePrefix::Node { label, children } => m.clauses(q, label).iter().any(|c| {
            c.iter()
                .all(|&(k, p)| children.get(k - 1).is_some_and(|child| run_search(m, child, p)))
        }),
    }
}
