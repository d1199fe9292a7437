use super::AnnotatedHors;
use crate::automata::{satisfies, Apt, Color, State};
use crate::syntax::{unfold, Hors, TreePrefix};
use std::collections::BTreeSet;
use std::fmt;

/// Outcome of checking a witness on a finite prefix. Parity cannot be judged
/// on a prefix, so the largest color per branch is only recorded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub depth: usize,
    pub nodes: usize,
    /// Disagreements with the value tree of the original scheme.
    pub mismatches: Vec<String>,
    /// Broken transitions, wrong states or colors.
    pub violations: Vec<String>,
    /// For each leaf or cut of the run-tree prefix: its path and largest color.
    pub branches: Vec<(Vec<usize>, Color)>,
    /// The value-tree nodes the run visits; unvisited subtrees are `_|_`.
    pub projection: TreePrefix,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.violations.is_empty()
    }
}

fn show_path(p: &[usize]) -> String {
    if p.is_empty() {
        return "root".to_string();
    }
    p.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(".")
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "depth: {}", self.depth)?;
        writeln!(f, "nodes: {}", self.nodes)?;
        writeln!(f, "projection mismatches: {}", self.mismatches.len())?;
        for m in &self.mismatches {
            writeln!(f, "  {}", m)?;
        }
        writeln!(f, "transition violations: {}", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {}", v)?;
        }
        writeln!(f, "branches: {}", self.branches.len())?;
        for (p, c) in &self.branches {
            writeln!(f, "  {} max color {}", show_path(p), c)?;
        }
        writeln!(f, "result: {}", if self.passed() { "OK" } else { "FAILED" })
    }
}

/// Unfolds `g` and `h` to `depth` and checks the annotated tree node by node.
pub fn verify_runtree(g: &AnnotatedHors, h: &Hors, m: &Apt, q: State, depth: usize) -> RunReport {
    let fail = |mismatch: Option<String>, violation: Option<String>| RunReport {
        depth,
        nodes: 0,
        mismatches: mismatch.into_iter().collect(),
        violations: violation.into_iter().collect(),
        branches: Vec::new(),
        projection: TreePrefix::Bottom,
    };
    let run = match unfold(&g.hors, depth) {
        Ok(t) => t,
        Err(e) => return fail(None, Some(format!("witness does not unfold: {}", e))),
    };
    let tree = match unfold(h, depth) {
        Ok(t) => t,
        Err(e) => return fail(Some(format!("scheme does not unfold: {}", e)), None),
    };
    check_run(g, &run, &tree, m, q, depth)
}

/// Checks an unfolded run-tree prefix against a value tree prefix.
pub fn check_run(g: &AnnotatedHors, run: &TreePrefix, tree: &TreePrefix, m: &Apt, q: State, depth: usize) -> RunReport {
    let mut r = RunReport {
        depth,
        nodes: 0,
        mismatches: Vec::new(),
        violations: Vec::new(),
        branches: Vec::new(),
        projection: TreePrefix::Bottom,
    };
    let mut visited = BTreeSet::new();
    let mut w = Walk {
        g,
        m,
        tree,
        report: &mut r,
        visited: &mut visited,
    };
    w.node(run, &mut Vec::new(), &mut Vec::new(), q, Color::Eps);
    r.projection = project(tree, &mut Vec::new(), &visited);
    if !r.projection.is_prefix_of(tree) {
        r.mismatches.push("projection is not a prefix of the value tree".into());
    }
    r
}

struct Walk<'a> {
    g: &'a AnnotatedHors,
    m: &'a Apt,
    tree: &'a TreePrefix,
    report: &'a mut RunReport,
    visited: &'a mut BTreeSet<Vec<usize>>,
}

impl Walk<'_> {
    /// `path` is in the run-tree, `orig` the matching path of the value tree.
    fn node(&mut self, t: &TreePrefix, path: &mut Vec<usize>, orig: &mut Vec<usize>, q: State, max: Color) {
        let TreePrefix::Node { label, children } = t else {
            self.report.branches.push((path.clone(), max));
            return;
        };
        self.report.nodes += 1;
        let at = show_path(path);
        let Some(l) = self.g.terminals.get(label) else {
            self.report.violations.push(format!("{}: `{}` is not an annotated terminal", at, label));
            return;
        };
        self.visited.insert(orig.clone());
        match self.tree.at(orig) {
            Some(TreePrefix::Node { label: a, .. }) if *a == l.symbol => {}
            Some(TreePrefix::Node { label: a, .. }) => self
                .report
                .mismatches
                .push(format!("{}: run reads `{}` where the value tree has `{}`", at, l.symbol, a)),
            _ => self
                .report
                .mismatches
                .push(format!("{}: run reads `{}` outside the value tree", at, l.symbol)),
        }
        if l.state != q {
            self.report
                .violations
                .push(format!("{}: state {} where {} was sent", at, self.m.name(l.state), self.m.name(q)));
        }
        if !satisfies(&l.profile, l.state, &l.symbol, l.profile.len(), self.m).unwrap_or(false) {
            self.report.violations.push(format!(
                "{}: profile does not satisfy the transition of ({}, {})",
                at,
                self.m.name(l.state),
                l.symbol
            ));
        }
        if children.len() != l.arity() {
            self.report
                .violations
                .push(format!("{}: {} children for {} pairs", at, children.len(), l.arity()));
        }
        if children.is_empty() {
            self.report.branches.push((path.clone(), max));
        }
        for (i, ((k, c, p), child)) in l.children().zip(children).enumerate() {
            if c != self.m.color(p) {
                self.report
                    .violations
                    .push(format!("{}: pair {}.{} has the wrong color", at, c, self.m.name(p)));
            }
            path.push(i + 1);
            orig.push(k);
            self.node(child, path, orig, p, max.max(c));
            orig.pop();
            path.pop();
        }
    }
}

/// The value tree restricted to visited paths.
fn project(t: &TreePrefix, path: &mut Vec<usize>, visited: &BTreeSet<Vec<usize>>) -> TreePrefix {
    match t {
        TreePrefix::Node { label, children } if visited.contains(path) => {
            let mut out = Vec::with_capacity(children.len());
            for (i, c) in children.iter().enumerate() {
                path.push(i + 1);
                out.push(project(c, path, visited));
                path.pop();
            }
            TreePrefix::node(label.clone(), out)
        }
        _ => TreePrefix::Bottom,
    }
}
