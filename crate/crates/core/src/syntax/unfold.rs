use super::{check_wellformed, Diagnostic, Hors, Term, TreePrefix};
use std::collections::HashMap;

pub const DEFAULT_STEP_BUDGET: usize = 10_000;
pub const DEFAULT_MAX_TERM_SIZE: usize = 4_096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnfoldOptions {
    /// Rewrite steps allowed while computing the head symbol of one node.
    pub step_budget: usize,
    /// Largest intermediate term; growing arguments of a divergent node stop here.
    pub max_term_size: usize,
}

impl Default for UnfoldOptions {
    fn default() -> Self {
        UnfoldOptions {
            step_budget: DEFAULT_STEP_BUDGET,
            max_term_size: DEFAULT_MAX_TERM_SIZE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum UnfoldError {
    #[error("scheme is not well-formed: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    IllFormed(Vec<Diagnostic>),
    #[error("node at path {path:?} unresolved within budget of {budget} rewrite steps")]
    Budget { path: Vec<usize>, budget: usize },
    #[error("node at path {path:?} grew past {limit} syntax nodes while rewriting")]
    TermTooLarge { path: Vec<usize>, limit: usize },
}

/// The depth-`depth` prefix of the value tree.
pub fn unfold(h: &Hors, depth: usize) -> Result<TreePrefix, UnfoldError> {
    unfold_with(h, depth, UnfoldOptions::default())
}

pub fn unfold_with(h: &Hors, depth: usize, opts: UnfoldOptions) -> Result<TreePrefix, UnfoldError> {
    let diags = check_wellformed(h);
    if !diags.is_empty() {
        return Err(UnfoldError::IllFormed(diags));
    }
    let rules: HashMap<&str, (Vec<&str>, &Term)> = h
        .rules
        .iter()
        .map(|(n, r)| (n.as_str(), (r.binders.iter().map(|(b, _)| b.as_str()).collect(), &r.body)))
        .collect();
    let mut path = Vec::new();
    build(&rules, Term::nonterminal(h.start.clone()), depth, opts, &mut path)
}

fn build(
    rules: &HashMap<&str, (Vec<&str>, &Term)>,
    term: Term,
    depth: usize,
    opts: UnfoldOptions,
    path: &mut Vec<usize>,
) -> Result<TreePrefix, UnfoldError> {
    if depth == 0 {
        return Ok(TreePrefix::Bottom);
    }
    let (label, args) = head_normalize(rules, term, opts).map_err(|stop| match stop {
        Stop::Steps => UnfoldError::Budget {
            path: path.clone(),
            budget: opts.step_budget,
        },
        Stop::Size => UnfoldError::TermTooLarge {
            path: path.clone(),
            limit: opts.max_term_size,
        },
    })?;
    let mut children = Vec::with_capacity(args.len());
    for (i, a) in args.into_iter().enumerate() {
        path.push(i + 1);
        children.push(build(rules, a, depth - 1, opts, path)?);
        path.pop();
    }
    Ok(TreePrefix::Node { label, children })
}

enum Stop {
    Steps,
    Size,
}

/// Outermost rewriting until the head is a terminal.
fn head_normalize(
    rules: &HashMap<&str, (Vec<&str>, &Term)>,
    mut term: Term,
    opts: UnfoldOptions,
) -> Result<(String, Vec<Term>), Stop> {
    for _ in 0..=opts.step_budget {
        if term.size() > opts.max_term_size {
            return Err(Stop::Size);
        }
        let (head, args) = term.spine();
        match head {
            Term::Terminal(a) => {
                let label = a.clone();
                let args = args.into_iter().cloned().collect();
                return Ok((label, args));
            }
            Term::NonTerminal(f) => {
                let (binders, body) = &rules[f.as_str()];
                // well-formedness guarantees ground terms apply every binder
                debug_assert_eq!(binders.len(), args.len());
                let bind: HashMap<&str, &Term> = binders.iter().copied().zip(args.iter().copied()).collect();
                let next = body.subst_vars(&|x| bind.get(x).map(|t| (*t).clone()));
                term = next;
            }
            _ => unreachable!("closed applicative term with head {}", head),
        }
    }
    Err(Stop::Steps)
}
