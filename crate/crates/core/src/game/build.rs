use super::parity::{zielonka, Owner, ParityGame, Solution};
use crate::automata::{Apt, AptError, Color, State};
use crate::itypes::{ColoredSet, IType, ITypeError, TypeSpace, DEFAULT_ENUM_BOUND};
use crate::syntax::{check_wellformed, Diagnostic, Hors, Term};
use crate::typing::{DeriveError, Name, TypeEnv};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write};
use std::rc::Rc;

/// Assumptions on nonterminals: antichain-reduced colored sets, empty sets omitted.
pub type Assumptions = BTreeMap<String, ColoredSet>;

/// A sequent of the game.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GameNode {
    /// Eve must justify `nt : ty` by picking assumptions that type its body.
    Eve { nt: String, ty: IType },
    /// Adam challenges one assumption of `delta`.
    Adam { nt: String, ty: IType, delta: Assumptions },
    /// Carries the color under which the challenged assumption was used.
    Color { color: Color, nt: String, ty: IType },
}

impl GameNode {
    pub fn owner(&self) -> Owner {
        match self {
            GameNode::Eve { .. } => Owner::Eve,
            GameNode::Adam { .. } | GameNode::Color { .. } => Owner::Adam,
        }
    }

    pub fn priority(&self) -> u32 {
        match self {
            GameNode::Color { color, .. } => color.priority(),
            _ => 1,
        }
    }

    pub fn display<'a>(&'a self, m: &'a Apt) -> impl fmt::Display + 'a {
        ShownNode(self, m)
    }
}

struct ShownNode<'a>(&'a GameNode, &'a Apt);

impl fmt::Display for ShownNode<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.1;
        match self.0 {
            GameNode::Eve { nt, ty } => write!(f, "{} : {}", nt, ty.display(m)),
            GameNode::Adam { nt, ty, delta } => {
                write!(f, "{} : {} | ", nt, ty.display(m))?;
                if delta.is_empty() {
                    return write!(f, "{{}}");
                }
                for (i, (g, u)) in delta.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{} : {}", g, u.display(m))?;
                }
                Ok(())
            }
            GameNode::Color { color, nt, ty } => write!(f, "{} | {} : {}", color, nt, ty.display(m)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("scheme is not well-formed: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    IllFormed(Vec<Diagnostic>),
    #[error(transparent)]
    Automaton(#[from] AptError),
    #[error(transparent)]
    Types(#[from] ITypeError),
    #[error(transparent)]
    Derive(#[from] DeriveError),
    #[error("game exceeds {limit} nodes (aborted at {count})")]
    TooManyNodes { count: usize, limit: usize },
    #[error("{count} costly argument types for an occurrence of `{nonterminal}` (limit {limit})")]
    TooManyCandidates {
        nonterminal: String,
        count: usize,
        limit: usize,
    },
    #[error("{count} alternative assumption sets in a body of `{nonterminal}` (limit {limit})")]
    TooManyAlternatives {
        nonterminal: String,
        count: usize,
        limit: usize,
    },
}

/// Size guards for game construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    pub max_nodes: usize,
    /// Argument types per nonterminal occurrence that need assumptions; all
    /// subsets of them are tried.
    pub max_candidates: usize,
    pub max_alternatives: usize,
    pub enum_bound: u128,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_nodes: 200_000,
            max_candidates: 16,
            max_alternatives: 4096,
            enum_bound: DEFAULT_ENUM_BOUND,
        }
    }
}

/// The reachable part of the game, with node ids in discovery order.
#[derive(Debug, Clone)]
pub struct HorsGame {
    pub arena: ParityGame,
    pub nodes: Vec<GameNode>,
    index: HashMap<GameNode, usize>,
    /// Id of `Eve(S, q)` for every seeded state.
    pub seeds: BTreeMap<State, usize>,
}

impl HorsGame {
    pub fn id(&self, node: &GameNode) -> Option<usize> {
        self.index.get(node).copied()
    }

    pub fn seed(&self, q: State) -> Option<usize> {
        self.seeds.get(&q).copied()
    }

    /// Graphviz text: Eve nodes are boxes, Adam nodes diamonds, color nodes
    /// ellipses; labels hold the sequent and the priority; seeds have a double border.
    pub fn to_dot(&self, m: &Apt) -> String {
        let mut out = String::from("digraph game {\n  node [fontname=\"monospace\"];\n");
        let seeds: BTreeSet<usize> = self.seeds.values().copied().collect();
        for (i, n) in self.nodes.iter().enumerate() {
            let shape = match n {
                GameNode::Eve { .. } => "box",
                GameNode::Adam { .. } => "diamond",
                GameNode::Color { .. } => "ellipse",
            };
            let label = n.display(m).to_string().replace('"', "\\\"");
            write!(out, "  n{} [shape={}, label=\"{}\\np={}\"", i, shape, label, n.priority()).unwrap();
            if seeds.contains(&i) {
                out.push_str(", peripheries=2");
            }
            out.push_str("];\n");
        }
        for v in 0..self.arena.len() {
            for w in self.arena.successors(v) {
                writeln!(out, "  n{} -> n{};", v, w).unwrap();
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the game seeded at every state.
pub fn build_game(h: &Hors, m: &Apt) -> Result<HorsGame, GameError> {
    let all: Vec<State> = m.states().collect();
    build_game_with(h, m, &all, &BuildOptions::default())
}

pub fn build_game_with(h: &Hors, m: &Apt, seeds: &[State], opts: &BuildOptions) -> Result<HorsGame, GameError> {
    let diags = check_wellformed(h);
    if !diags.is_empty() {
        return Err(GameError::IllFormed(diags));
    }
    m.check_alphabet(&h.terminals)?;
    let space = TypeSpace::with_bound(m, opts.enum_bound);
    let mut g = HorsGame {
        arena: ParityGame::new(),
        nodes: Vec::new(),
        index: HashMap::new(),
        seeds: BTreeMap::new(),
    };
    let mut queue = VecDeque::new();
    let mut shared = Memo::new();
    let intern = |g: &mut HorsGame, node: GameNode, queue: &mut VecDeque<usize>| -> Result<usize, GameError> {
        if let Some(&id) = g.index.get(&node) {
            return Ok(id);
        }
        if g.nodes.len() >= opts.max_nodes {
            return Err(GameError::TooManyNodes {
                count: g.nodes.len(),
                limit: opts.max_nodes,
            });
        }
        let id = g.arena.add_node(node.owner(), node.priority());
        g.nodes.push(node.clone());
        g.index.insert(node, id);
        queue.push_back(id);
        Ok(id)
    };
    for &q in seeds {
        let id = intern(
            &mut g,
            GameNode::Eve {
                nt: h.start.clone(),
                ty: IType::State(q),
            },
            &mut queue,
        )?;
        g.seeds.insert(q, id);
    }
    g.arena.initial = g.seed(m.initial()).or_else(|| g.seeds.values().next().copied()).unwrap_or(0);

    while let Some(id) = queue.pop_front() {
        let succs: Vec<GameNode> = match g.nodes[id].clone() {
            GameNode::Eve { nt, ty } => moves(h, m, &space, opts, &mut shared, &nt, &ty)?
                .into_iter()
                .map(|delta| GameNode::Adam {
                    nt: nt.clone(),
                    ty: ty.clone(),
                    delta,
                })
                .collect(),
            GameNode::Adam { delta, .. } => delta
                .iter()
                .flat_map(|(f, u)| {
                    u.iter().map(move |(c, t)| GameNode::Color {
                        color: *c,
                        nt: f.clone(),
                        ty: t.clone(),
                    })
                })
                .collect(),
            GameNode::Color { nt, ty, .. } => vec![GameNode::Eve { nt, ty }],
        };
        for s in succs {
            let sid = intern(&mut g, s, &mut queue)?;
            g.arena.add_edge(id, sid);
        }
    }
    Ok(g)
}

/// The ≤-minimal assumption maps under which the body of `nt` has the
/// result of `ty`, given its parameters typed by the argument sets of `ty`.
pub fn eve_moves(
    h: &Hors,
    m: &Apt,
    space: &TypeSpace,
    opts: &BuildOptions,
    nt: &str,
    ty: &IType,
) -> Result<Vec<Assumptions>, GameError> {
    moves(h, m, space, opts, &mut Memo::new(), nt, ty)
}

fn moves(
    h: &Hors,
    m: &Apt,
    space: &TypeSpace,
    opts: &BuildOptions,
    closed: &mut Memo,
    nt: &str,
    ty: &IType,
) -> Result<Vec<Assumptions>, GameError> {
    let rule = &h.rules[nt];
    let (sets, res) = ty
        .split(rule.binders.len())
        .expect("node types follow the nonterminal's sort");
    let q = res.clone();
    let params: TypeEnv = rule
        .binders
        .iter()
        .zip(sets)
        .map(|((x, _), u)| (Name::Var(x.clone()), u.clone()))
        .collect();
    let mut gen = Gen {
        h,
        m,
        space,
        opts,
        owner: nt,
        params: &params,
        memo: HashMap::new(),
        closed,
    };
    let alts = gen.at(Color::Eps, &rule.body, &q)?;
    Ok(alts.as_ref().clone())
}

/// Combines two maps, keeping only maximal types per nonterminal and color.
pub fn join(a: &Assumptions, b: &Assumptions) -> Assumptions {
    let mut out = a.clone();
    for (g, u) in b {
        let merged = match out.get(g) {
            Some(v) => v.union(u).antichain(),
            None => u.clone(),
        };
        out.insert(g.clone(), merged);
    }
    out
}

/// `a` asks for less than `b`.
pub fn assumptions_le(a: &Assumptions, b: &Assumptions) -> bool {
    let empty = ColoredSet::empty();
    a.iter().all(|(g, u)| u.le(b.get(g).unwrap_or(&empty)))
}

/// Drops maps above another one. Of equivalent maps the least in sorted
/// order stays; the result is sorted.
fn minimize(alts: Vec<Assumptions>) -> Vec<Assumptions> {
    let uniq: BTreeSet<Assumptions> = alts.into_iter().collect();
    let mut kept: Vec<Assumptions> = Vec::new();
    for a in uniq {
        if kept.iter().any(|k| assumptions_le(k, &a)) {
            continue;
        }
        kept.retain(|k| !assumptions_le(&a, k));
        kept.push(a);
    }
    kept.sort();
    kept
}

type Alts = Rc<Vec<Assumptions>>;
type Memo = HashMap<(Color, *const Term, IType), Alts>;

/// Unminimized products may exceed `max_alternatives` by this factor.
const RAW_PRODUCT_FACTOR: usize = 16;

/// Generates assumption maps along the same head-driven search as `derive`.
struct Gen<'a> {
    h: &'a Hors,
    m: &'a Apt,
    space: &'a TypeSpace,
    opts: &'a BuildOptions,
    owner: &'a str,
    params: &'a TypeEnv,
    memo: Memo,
    /// Results for variable-free terms, valid across nonterminals.
    closed: &'a mut Memo,
}

impl Gen<'_> {
    fn at(&mut self, k: Color, t: &Term, target: &IType) -> Result<Alts, GameError> {
        let key = (k, t as *const Term, target.clone());
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let is_closed = t.free_vars().is_empty();
        if is_closed {
            if let Some(hit) = self.closed.get(&key) {
                return Ok(hit.clone());
            }
        }
        let (head, args) = t.spine();
        let found = match head {
            Term::Var(x) => self.var(k, x, &args, target)?,
            Term::Terminal(a) => self.terminal(k, a, &args, target)?,
            Term::NonTerminal(f) => self.nonterminal(k, f, &args, target)?,
            _ => return Err(DeriveError::Unsupported(t.to_string()).into()),
        };
        let found = Rc::new(found);
        if is_closed {
            self.closed.insert(key.clone(), found.clone());
        }
        self.memo.insert(key, found.clone());
        Ok(found)
    }

    fn product(&self, acc: Vec<Assumptions>, more: &[Assumptions]) -> Result<Vec<Assumptions>, GameError> {
        self.check_count(acc.len().saturating_mul(more.len()) / RAW_PRODUCT_FACTOR)?;
        let mut out = Vec::with_capacity(acc.len() * more.len());
        for a in &acc {
            for b in more {
                out.push(join(a, b));
            }
        }
        let out = minimize(out);
        self.check_count(out.len())?;
        Ok(out)
    }

    fn check_count(&self, count: usize) -> Result<(), GameError> {
        if count > self.opts.max_alternatives {
            return Err(GameError::TooManyAlternatives {
                nonterminal: self.owner.to_string(),
                count,
                limit: self.opts.max_alternatives,
            });
        }
        Ok(())
    }

    fn var(&mut self, k: Color, x: &str, args: &[&Term], target: &IType) -> Result<Vec<Assumptions>, GameError> {
        let entries = self
            .params
            .get(&Name::Var(x.to_string()))
            .ok_or_else(|| DeriveError::Unbound(x.to_string()))?
            .clone();
        let mut out = Vec::new();
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
            let mut acc = vec![Assumptions::new()];
            for (u, arg) in sets.iter().zip(args) {
                for (ci, beta) in u.iter() {
                    let alts = self.at(k.max(*ci), arg, beta)?;
                    acc = self.product(acc, &alts)?;
                    if acc.is_empty() {
                        continue 'entries;
                    }
                }
            }
            out.extend(acc);
        }
        Ok(minimize(out))
    }

    fn terminal(&mut self, k: Color, a: &str, args: &[&Term], target: &IType) -> Result<Vec<Assumptions>, GameError> {
        let n = self.h.terminals[a];
        let m = args.len();
        let Some((open, res)) = n.checked_sub(m).and_then(|r| target.split(r)) else {
            return Ok(Vec::new());
        };
        let Some(q) = res.as_state() else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        'clauses: for clause in self.m.clauses(q, a) {
            for &(d, p) in clause {
                if d > m && !open[d - m - 1].contains(self.m.color(p), &IType::State(p)) {
                    continue 'clauses;
                }
            }
            let mut acc = vec![Assumptions::new()];
            for &(d, p) in clause.iter().filter(|(d, _)| *d <= m) {
                let alts = self.at(k.max(self.m.color(p)), args[d - 1], &IType::State(p))?;
                acc = self.product(acc, &alts)?;
                if acc.is_empty() {
                    continue 'clauses;
                }
            }
            out.extend(acc);
        }
        Ok(minimize(out))
    }

    /// Eve picks the head's type: every argument type that needs no
    /// assumption is included, and each subset of the costly ones is tried.
    fn nonterminal(&mut self, k: Color, f: &str, args: &[&Term], target: &IType) -> Result<Vec<Assumptions>, GameError> {
        let sort = self.h.nonterminals[f].clone();
        let domains = sort.domains();
        let mut free: Vec<Vec<(Color, IType)>> = vec![Vec::new(); args.len()];
        let mut costly: Vec<Candidate> = Vec::new();
        for (i, arg) in args.iter().enumerate() {
            for (c, beta) in self.space.pairs(domains[i])? {
                let alts = self.at(k.max(c), arg, &beta)?;
                if alts.is_empty() {
                    continue;
                }
                if alts.iter().any(|a| a.is_empty()) {
                    free[i].push((c, beta));
                } else {
                    costly.push((i, c, beta, alts));
                }
            }
        }
        if costly.len() > self.opts.max_candidates {
            return Err(GameError::TooManyCandidates {
                nonterminal: f.to_string(),
                count: costly.len(),
                limit: self.opts.max_candidates,
            });
        }
        let mut out = Vec::new();
        let sub = Subsets {
            k,
            f,
            target,
            free: &free,
            costly: &costly,
        };
        self.subsets(&sub, 0, &mut Vec::new(), vec![Assumptions::new()], &mut out)?;
        Ok(minimize(out))
    }

    /// Includes or skips each costly candidate in turn, sharing the products of common prefixes.
    fn subsets(
        &self,
        sub: &Subsets,
        i: usize,
        chosen: &mut Vec<usize>,
        acc: Vec<Assumptions>,
        out: &mut Vec<Assumptions>,
    ) -> Result<(), GameError> {
        if acc.is_empty() {
            return Ok(());
        }
        if i == sub.costly.len() {
            let picked: Vec<&Candidate> = chosen.iter().map(|&j| &sub.costly[j]).collect();
            let mut sets = Vec::with_capacity(sub.free.len());
            for (a, fr) in sub.free.iter().enumerate() {
                let extra = picked.iter().filter(|x| x.0 == a).map(|x| (x.1, x.2.clone()));
                sets.push(ColoredSet::new(fr.iter().cloned().chain(extra)).antichain());
            }
            // a chosen pair absorbed by another one only adds cost
            if picked.iter().any(|x| !sets[x.0].contains(x.1, &x.2)) {
                return Ok(());
            }
            let ty = IType::arrows(sets, sub.target.clone());
            let head = Assumptions::from([(sub.f.to_string(), ColoredSet::new([(sub.k, ty)]))]);
            out.extend(acc.iter().map(|a| join(&head, a)));
            if out.len() > self.opts.max_alternatives {
                *out = minimize(std::mem::take(out));
                self.check_count(out.len())?;
            }
            return Ok(());
        }
        self.subsets(sub, i + 1, chosen, acc.clone(), out)?;
        let with = self.product(acc, &sub.costly[i].3)?;
        chosen.push(i);
        self.subsets(sub, i + 1, chosen, with, out)?;
        chosen.pop();
        Ok(())
    }
}

/// An argument position with a pair whose derivation needs assumptions.
type Candidate = (usize, Color, IType, Alts);

struct Subsets<'a> {
    k: Color,
    f: &'a str,
    target: &'a IType,
    free: &'a [Vec<(Color, IType)>],
    costly: &'a [Candidate],
}

/// A built and solved game.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub game: HorsGame,
    pub solution: Solution,
}

impl Analysis {
    pub fn run(h: &Hors, m: &Apt, seeds: &[State], opts: &BuildOptions) -> Result<Analysis, GameError> {
        let game = build_game_with(h, m, seeds, opts)?;
        let solution = zielonka(&game.arena);
        Ok(Analysis { game, solution })
    }

    /// Whether Eve wins from `Eve(S, q)`; `false` for unseeded states.
    pub fn accepts(&self, q: State) -> bool {
        self.game.seed(q).is_some_and(|id| self.solution.win_eve.contains(&id))
    }
}

/// The states from which the automaton accepts the value tree.
pub fn accepted_states(h: &Hors, m: &Apt) -> Result<BTreeSet<State>, GameError> {
    let all: Vec<State> = m.states().collect();
    let a = Analysis::run(h, m, &all, &BuildOptions::default())?;
    Ok(all.into_iter().filter(|&q| a.accepts(q)).collect())
}
