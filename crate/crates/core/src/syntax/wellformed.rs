use super::{Hors, Signature, SimpleType};
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagnosticKind {
    StartUndeclared,
    StartNotGround,
    MissingRule,
    RuleForUndeclared,
    NameClash,
    DuplicateBinder,
    BinderMismatch,
    BodyNotAbstractionFree,
    IllSorted,
    BodyNotGround,
}

impl DiagnosticKind {
    pub fn describe(self) -> &'static str {
        match self {
            DiagnosticKind::StartUndeclared => "start undeclared",
            DiagnosticKind::StartNotGround => "start not ground",
            DiagnosticKind::MissingRule => "missing rule",
            DiagnosticKind::RuleForUndeclared => "rule for undeclared nonterminal",
            DiagnosticKind::NameClash => "name declared twice",
            DiagnosticKind::DuplicateBinder => "duplicate binder",
            DiagnosticKind::BinderMismatch => "binders do not match declared sort",
            DiagnosticKind::BodyNotAbstractionFree => "body not abstraction-free",
            DiagnosticKind::IllSorted => "ill-sorted body",
            DiagnosticKind::BodyNotGround => "body not ground",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// The rule or symbol the problem is attached to.
    pub subject: String,
    pub kind: DiagnosticKind,
    pub detail: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.kind.describe())?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

pub fn check_wellformed(h: &Hors) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut push = |subject: &str, kind, detail: String| {
        out.push(Diagnostic {
            subject: subject.to_string(),
            kind,
            detail,
        })
    };

    match h.nonterminals.get(&h.start) {
        None => push(&h.start, DiagnosticKind::StartUndeclared, String::new()),
        Some(s) if !s.is_ground() => push(&h.start, DiagnosticKind::StartNotGround, format!("sort {}", s)),
        Some(_) => {}
    }

    for name in h.nonterminals.keys() {
        if h.terminals.contains_key(name) {
            push(name, DiagnosticKind::NameClash, "both terminal and nonterminal".into());
        }
        if !h.rules.contains_key(name) {
            push(name, DiagnosticKind::MissingRule, String::new());
        }
    }

    let sig = Signature {
        terminals: &h.terminals,
        nonterminals: Some(&h.nonterminals),
    };
    for (name, rule) in &h.rules {
        let Some(sort) = h.nonterminals.get(name) else {
            push(name, DiagnosticKind::RuleForUndeclared, String::new());
            continue;
        };
        let mut seen = BTreeSet::new();
        for (b, _) in &rule.binders {
            if !seen.insert(b) {
                push(name, DiagnosticKind::DuplicateBinder, format!("`{}`", b));
            }
        }
        let doms = sort.domains();
        let binders_ok = rule.binders.len() <= doms.len()
            && rule.binders.iter().zip(&doms).all(|((_, s), d)| s == *d);
        if !binders_ok {
            push(
                name,
                DiagnosticKind::BinderMismatch,
                format!("{} binders against sort {}", rule.binders.len(), sort),
            );
            continue;
        }
        if !rule.body.is_applicative() {
            push(name, DiagnosticKind::BodyNotAbstractionFree, String::new());
            continue;
        }
        let mut scope: Vec<(String, SimpleType)> = rule.binders.clone();
        match sig.sort_of(&rule.body, &mut scope) {
            Err(e) => push(name, DiagnosticKind::IllSorted, e.to_string()),
            Ok(s) if !s.is_ground() => push(name, DiagnosticKind::BodyNotGround, format!("body has sort {}", s)),
            Ok(_) => {}
        }
    }
    out
}
