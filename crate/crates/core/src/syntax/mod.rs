//! Simple types, applicative terms, recursion schemes and their finite unfoldings.

mod lambda_y;
mod unfold;
mod wellformed;

pub use lambda_y::{bohm_prefix, from_lambda_y, to_lambda_y, LambdaYError};
pub use unfold::{unfold, unfold_with, UnfoldError, UnfoldOptions, DEFAULT_MAX_TERM_SIZE, DEFAULT_STEP_BUDGET};
pub use wellformed::{check_wellformed, Diagnostic, DiagnosticKind};

use indexmap::IndexMap;
use std::collections::BTreeSet;
use std::fmt;

/// Simple types `o | σ -> τ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SimpleType {
    Ground,
    Arrow(Box<SimpleType>, Box<SimpleType>),
}

impl SimpleType {
    pub fn arrow(domain: SimpleType, codomain: SimpleType) -> SimpleType {
        SimpleType::Arrow(Box::new(domain), Box::new(codomain))
    }

    /// `o -> ... -> o -> o` with `n` arrows, the sort of a terminal of arity `n`.
    pub fn first_order(n: usize) -> SimpleType {
        (0..n).fold(SimpleType::Ground, |acc, _| SimpleType::arrow(SimpleType::Ground, acc))
    }

    /// Builds `d1 -> ... -> dn -> result`.
    pub fn from_parts(domains: impl IntoIterator<Item = SimpleType>, result: SimpleType) -> SimpleType {
        let domains: Vec<_> = domains.into_iter().collect();
        domains
            .into_iter()
            .rev()
            .fold(result, |acc, d| SimpleType::arrow(d, acc))
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, SimpleType::Ground)
    }

    pub fn order(&self) -> usize {
        match self {
            SimpleType::Ground => 0,
            SimpleType::Arrow(a, b) => (a.order() + 1).max(b.order()),
        }
    }

    /// Number of arguments before reaching ground.
    pub fn arity(&self) -> usize {
        match self {
            SimpleType::Ground => 0,
            SimpleType::Arrow(_, b) => 1 + b.arity(),
        }
    }

    pub fn domains(&self) -> Vec<&SimpleType> {
        let mut out = Vec::new();
        let mut cur = self;
        while let SimpleType::Arrow(a, b) = cur {
            out.push(a.as_ref());
            cur = b;
        }
        out
    }

    /// The sort left after applying `n` arguments, if there are that many.
    pub fn after(&self, n: usize) -> Option<&SimpleType> {
        let mut cur = self;
        for _ in 0..n {
            match cur {
                SimpleType::Arrow(_, b) => cur = b,
                SimpleType::Ground => return None,
            }
        }
        Some(cur)
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleType::Ground => write!(f, "o"),
            SimpleType::Arrow(a, b) => {
                if a.is_ground() {
                    write!(f, "o -> {}", b)
                } else {
                    write!(f, "({}) -> {}", a, b)
                }
            }
        }
    }
}

/// Terms of the λY-calculus with terminal and nonterminal constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Terminal(String),
    NonTerminal(String),
    App(Box<Term>, Box<Term>),
    Lambda {
        binder: String,
        sort: SimpleType,
        body: Box<Term>,
    },
    Fix {
        sort: SimpleType,
        body: Box<Term>,
    },
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn terminal(name: impl Into<String>) -> Term {
        Term::Terminal(name.into())
    }

    pub fn nonterminal(name: impl Into<String>) -> Term {
        Term::NonTerminal(name.into())
    }

    pub fn app(fun: Term, arg: Term) -> Term {
        Term::App(Box::new(fun), Box::new(arg))
    }

    pub fn apps(head: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(head, Term::app)
    }

    pub fn lambda(binder: impl Into<String>, sort: SimpleType, body: Term) -> Term {
        Term::Lambda {
            binder: binder.into(),
            sort,
            body: Box::new(body),
        }
    }

    pub fn fix(sort: SimpleType, body: Term) -> Term {
        Term::Fix {
            sort,
            body: Box::new(body),
        }
    }

    /// Splits `h t1 ... tn` into the head and its arguments.
    pub fn spine(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let Term::App(f, a) = cur {
            args.push(a.as_ref());
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    /// Number of syntax nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Terminal(_) | Term::NonTerminal(_) => 1,
            Term::App(f, a) => 1 + f.size() + a.size(),
            Term::Lambda { body, .. } | Term::Fix { body, .. } => 1 + body.size(),
        }
    }

    pub fn is_applicative(&self) -> bool {
        match self {
            Term::Var(_) | Term::Terminal(_) | Term::NonTerminal(_) => true,
            Term::App(f, a) => f.is_applicative() && a.is_applicative(),
            Term::Lambda { .. } | Term::Fix { .. } => false,
        }
    }

    /// Free variables in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        fn go(t: &Term, bound: &mut Vec<String>, out: &mut Vec<String>) {
            match t {
                Term::Var(x) => {
                    if !bound.contains(x) && !out.contains(x) {
                        out.push(x.clone());
                    }
                }
                Term::Terminal(_) | Term::NonTerminal(_) => {}
                Term::App(f, a) => {
                    go(f, bound, out);
                    go(a, bound, out);
                }
                Term::Lambda { binder, body, .. } => {
                    bound.push(binder.clone());
                    go(body, bound, out);
                    bound.pop();
                }
                Term::Fix { body, .. } => go(body, bound, out),
            }
        }
        let mut out = Vec::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn nonterminals(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::NonTerminal(n) = t {
                out.insert(n.clone());
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        match self {
            Term::App(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Term::Lambda { body, .. } | Term::Fix { body, .. } => body.visit(f),
            _ => {}
        }
    }

    /// Replaces free occurrences of variables. Replacement terms must not have
    /// free variables that a binder of `self` could capture.
    pub fn subst_vars(&self, map: &dyn Fn(&str) -> Option<Term>) -> Term {
        fn go(t: &Term, map: &dyn Fn(&str) -> Option<Term>, shadow: &mut Vec<String>) -> Term {
            match t {
                Term::Var(x) if !shadow.contains(x) => map(x).unwrap_or_else(|| t.clone()),
                Term::Var(_) | Term::Terminal(_) | Term::NonTerminal(_) => t.clone(),
                Term::App(f, a) => Term::app(go(f, map, shadow), go(a, map, shadow)),
                Term::Lambda { binder, sort, body } => {
                    shadow.push(binder.clone());
                    let body = go(body, map, shadow);
                    shadow.pop();
                    Term::lambda(binder.clone(), sort.clone(), body)
                }
                Term::Fix { sort, body } => Term::fix(sort.clone(), go(body, map, shadow)),
            }
        }
        go(self, map, &mut Vec::new())
    }

    /// Replaces nonterminal constants.
    pub fn subst_nonterminals(&self, map: &dyn Fn(&str) -> Option<Term>) -> Term {
        match self {
            Term::NonTerminal(n) => map(n).unwrap_or_else(|| self.clone()),
            Term::Var(_) | Term::Terminal(_) => self.clone(),
            Term::App(f, a) => Term::app(f.subst_nonterminals(map), a.subst_nonterminals(map)),
            Term::Lambda { binder, sort, body } => {
                Term::lambda(binder.clone(), sort.clone(), body.subst_nonterminals(map))
            }
            Term::Fix { sort, body } => Term::fix(sort.clone(), body.subst_nonterminals(map)),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, in_arg: bool) -> fmt::Result {
        match self {
            Term::Var(x) | Term::Terminal(x) | Term::NonTerminal(x) => write!(f, "{}", x),
            Term::App(fun, arg) => {
                if in_arg {
                    write!(f, "(")?;
                }
                fun.fmt_prec(f, false)?;
                write!(f, " ")?;
                arg.fmt_prec(f, true)?;
                if in_arg {
                    write!(f, ")")?;
                }
                Ok(())
            }
            Term::Lambda { binder, sort, body } => {
                write!(f, "(\\{}:{}. ", binder, sort)?;
                body.fmt_prec(f, false)?;
                write!(f, ")")
            }
            Term::Fix { sort, body } => {
                write!(f, "(Y[{}] ", sort)?;
                body.fmt_prec(f, true)?;
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

/// `F x1 ... xn = body`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub binders: Vec<(String, SimpleType)>,
    pub body: Term,
}

/// A higher-order recursion scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hors {
    pub terminals: IndexMap<String, usize>,
    pub nonterminals: IndexMap<String, SimpleType>,
    pub rules: IndexMap<String, Rule>,
    pub start: String,
}

impl Hors {
    pub fn arity(&self, terminal: &str) -> Option<usize> {
        self.terminals.get(terminal).copied()
    }

    pub fn rule(&self, nonterminal: &str) -> Option<&Rule> {
        self.rules.get(nonterminal)
    }

    pub fn order(&self) -> usize {
        self.nonterminals.values().map(SimpleType::order).max().unwrap_or(0)
    }
}

/// Sorting context: where to look up the sort of each kind of name.
#[derive(Clone, Copy)]
pub struct Signature<'a> {
    pub terminals: &'a IndexMap<String, usize>,
    pub nonterminals: Option<&'a IndexMap<String, SimpleType>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SortError {
    #[error("unknown variable `{0}`")]
    UnboundVar(String),
    #[error("unknown terminal `{0}`")]
    UnknownTerminal(String),
    #[error("unknown nonterminal `{0}`")]
    UnknownNonTerminal(String),
    #[error("`{fun}` of sort {sort} cannot be applied")]
    NotAFunction { fun: String, sort: SimpleType },
    #[error("argument `{arg}` has sort {found}, expected {expected}")]
    ArgumentMismatch {
        arg: String,
        expected: SimpleType,
        found: SimpleType,
    },
    #[error("fixpoint body has sort {found}, expected {expected}")]
    FixMismatch { expected: SimpleType, found: SimpleType },
}

impl<'a> Signature<'a> {
    /// Infers the sort of `t` with the given variable scope (innermost last).
    pub fn sort_of(&self, t: &Term, scope: &mut Vec<(String, SimpleType)>) -> Result<SimpleType, SortError> {
        match t {
            Term::Var(x) => scope
                .iter()
                .rev()
                .find(|(n, _)| n == x)
                .map(|(_, s)| s.clone())
                .ok_or_else(|| SortError::UnboundVar(x.clone())),
            Term::Terminal(a) => self
                .terminals
                .get(a)
                .map(|&n| SimpleType::first_order(n))
                .ok_or_else(|| SortError::UnknownTerminal(a.clone())),
            Term::NonTerminal(n) => self
                .nonterminals
                .and_then(|nts| nts.get(n))
                .cloned()
                .ok_or_else(|| SortError::UnknownNonTerminal(n.clone())),
            Term::App(fun, arg) => {
                let fs = self.sort_of(fun, scope)?;
                let a = self.sort_of(arg, scope)?;
                match fs {
                    SimpleType::Arrow(d, c) => {
                        if *d == a {
                            Ok(*c)
                        } else {
                            Err(SortError::ArgumentMismatch {
                                arg: arg.to_string(),
                                expected: *d,
                                found: a,
                            })
                        }
                    }
                    SimpleType::Ground => Err(SortError::NotAFunction {
                        fun: fun.to_string(),
                        sort: fs,
                    }),
                }
            }
            Term::Lambda { binder, sort, body } => {
                scope.push((binder.clone(), sort.clone()));
                let b = self.sort_of(body, scope);
                scope.pop();
                Ok(SimpleType::arrow(sort.clone(), b?))
            }
            Term::Fix { sort, body } => {
                let b = self.sort_of(body, scope)?;
                let expected = SimpleType::arrow(sort.clone(), sort.clone());
                if b == expected {
                    Ok(sort.clone())
                } else {
                    Err(SortError::FixMismatch { expected, found: b })
                }
            }
        }
    }
}

/// A finite prefix of a ranked tree; `Bottom` marks a node not (yet) computed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TreePrefix {
    Bottom,
    Node { label: String, children: Vec<TreePrefix> },
}

impl TreePrefix {
    pub fn node(label: impl Into<String>, children: Vec<TreePrefix>) -> TreePrefix {
        TreePrefix::Node {
            label: label.into(),
            children,
        }
    }

    pub fn leaf(label: impl Into<String>) -> TreePrefix {
        TreePrefix::node(label, Vec::new())
    }

    pub fn label(&self) -> Option<&str> {
        match self {
            TreePrefix::Bottom => None,
            TreePrefix::Node { label, .. } => Some(label),
        }
    }

    pub fn children(&self) -> &[TreePrefix] {
        match self {
            TreePrefix::Bottom => &[],
            TreePrefix::Node { children, .. } => children,
        }
    }

    /// Follows 1-based directions.
    pub fn at(&self, path: &[usize]) -> Option<&TreePrefix> {
        let mut cur = self;
        for &d in path {
            cur = cur.children().get(d.checked_sub(1)?)?;
        }
        Some(cur)
    }

    /// `self` is obtained from `other` by cutting some subtrees down to `Bottom`.
    pub fn is_prefix_of(&self, other: &TreePrefix) -> bool {
        match (self, other) {
            (TreePrefix::Bottom, _) => true,
            (TreePrefix::Node { .. }, TreePrefix::Bottom) => false,
            (
                TreePrefix::Node { label: a, children: xs },
                TreePrefix::Node { label: b, children: ys },
            ) => a == b && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| x.is_prefix_of(y)),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            TreePrefix::Bottom => 1,
            TreePrefix::Node { children, .. } => 1 + children.iter().map(|c| c.node_count()).sum::<usize>(),
        }
    }

    /// Graphviz rendering; `_|_` nodes are drawn dashed.
    pub fn to_dot(&self) -> String {
        fn go(t: &TreePrefix, next: &mut usize, out: &mut String) -> usize {
            let id = *next;
            *next += 1;
            match t {
                TreePrefix::Bottom => {
                    out.push_str(&format!("  t{} [label=\"_|_\", style=dashed];\n", id));
                }
                TreePrefix::Node { label, children } => {
                    out.push_str(&format!("  t{} [label=\"{}\"];\n", id, dot_escape(label)));
                    for (i, c) in children.iter().enumerate() {
                        let cid = go(c, next, out);
                        out.push_str(&format!("  t{} -> t{} [label=\"{}\"];\n", id, cid, i + 1));
                    }
                }
            }
            id
        }
        let mut out = String::from("digraph tree {\n  node [shape=plaintext];\n");
        go(self, &mut 0, &mut out);
        out.push_str("}\n");
        out
    }
}

pub(crate) fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Nested s-expressions, `(a (b) _|_)`.
impl fmt::Display for TreePrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreePrefix::Bottom => write!(f, "_|_"),
            TreePrefix::Node { label, children } => {
                write!(f, "({}", label)?;
                for c in children {
                    write!(f, " {}", c)?;
                }
                write!(f, ")")
            }
        }
    }
}
