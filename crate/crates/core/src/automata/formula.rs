use super::State;
use std::collections::BTreeSet;

/// Positive boolean formula over `(direction, state)` atoms. Directions are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    Atom(usize, State),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

/// A conjunction of atoms.
pub type Clause = BTreeSet<(usize, State)>;

impl Formula {
    pub fn atom(d: usize, q: State) -> Formula {
        Formula::Atom(d, q)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, holds: &dyn Fn(usize, State) -> bool) -> bool {
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Atom(d, q) => holds(*d, *q),
            Formula::And(a, b) => a.eval(holds) && b.eval(holds),
            Formula::Or(a, b) => a.eval(holds) || b.eval(holds),
        }
    }

    pub fn atoms(&self) -> BTreeSet<(usize, State)> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<(usize, State)>) {
        match self {
            Formula::Atom(d, q) => {
                out.insert((*d, *q));
            }
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect(out);
                b.collect(out);
            }
            Formula::True | Formula::False => {}
        }
    }

    pub fn directions(&self) -> BTreeSet<usize> {
        self.atoms().into_iter().map(|(d, _)| d).collect()
    }

    pub(crate) fn check_states(&self, ok: &dyn Fn(State) -> bool) -> Result<(), State> {
        match self.atoms().into_iter().find(|(_, q)| !ok(*q)) {
            Some((_, q)) => Err(q),
            None => Ok(()),
        }
    }
}

/// Clauses of the disjunctive normal form, with supersets of other clauses removed.
/// `True` gives the single empty clause, `False` gives none.
pub fn dnf(f: &Formula) -> Vec<Clause> {
    match f {
        Formula::True => vec![Clause::new()],
        Formula::False => vec![],
        Formula::Atom(d, q) => vec![[(*d, *q)].into_iter().collect()],
        Formula::Or(a, b) => {
            let mut v = dnf(a);
            v.extend(dnf(b));
            reduce(v)
        }
        Formula::And(a, b) => {
            let (l, r) = (dnf(a), dnf(b));
            let mut v = Vec::with_capacity(l.len() * r.len());
            for x in &l {
                for y in &r {
                    v.push(x.union(y).copied().collect());
                }
            }
            reduce(v)
        }
    }
}

fn reduce(mut v: Vec<Clause>) -> Vec<Clause> {
    v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    v.dedup();
    let mut out: Vec<Clause> = Vec::new();
    for c in v {
        if !out.iter().any(|k| k.is_subset(&c)) {
            out.push(c);
        }
    }
    out.sort();
    out
}
