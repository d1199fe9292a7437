use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Owner {
    Eve,
    Adam,
}

impl Owner {
    pub fn opponent(self) -> Owner {
        match self {
            Owner::Eve => Owner::Adam,
            Owner::Adam => Owner::Eve,
        }
    }

    /// The player favored by a priority: even for Eve, odd for Adam.
    pub fn of_priority(p: u32) -> Owner {
        if p % 2 == 0 {
            Owner::Eve
        } else {
            Owner::Adam
        }
    }
}

/// A max-parity game. A player with no move loses.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ParityGame {
    owner: Vec<Owner>,
    priority: Vec<u32>,
    succ: Vec<Vec<usize>>,
    pub initial: usize,
}

impl ParityGame {
    pub fn new() -> ParityGame {
        ParityGame::default()
    }

    pub fn add_node(&mut self, owner: Owner, priority: u32) -> usize {
        self.owner.push(owner);
        self.priority.push(priority);
        self.succ.push(Vec::new());
        self.owner.len() - 1
    }

    /// Duplicate edges are ignored; successor lists stay sorted.
    pub fn add_edge(&mut self, from: usize, to: usize) {
        let s = &mut self.succ[from];
        if let Err(i) = s.binary_search(&to) {
            s.insert(i, to);
        }
    }

    pub fn len(&self) -> usize {
        self.owner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owner.is_empty()
    }

    pub fn owner(&self, v: usize) -> Owner {
        self.owner[v]
    }

    pub fn priority(&self, v: usize) -> u32 {
        self.priority[v]
    }

    pub fn successors(&self, v: usize) -> &[usize] {
        &self.succ[v]
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }
}

/// Winning regions and memoryless strategies on each player's own region.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Solution {
    pub win_eve: BTreeSet<usize>,
    pub win_adam: BTreeSet<usize>,
    pub strategy_eve: BTreeMap<usize, usize>,
    pub strategy_adam: BTreeMap<usize, usize>,
}

impl Solution {
    pub fn winner(&self, v: usize) -> Owner {
        if self.win_eve.contains(&v) {
            Owner::Eve
        } else {
            Owner::Adam
        }
    }
}

/// Recursive attractor decomposition. Dead ends are first routed to sinks
/// that make their owner lose; ties go to the least successor id.
pub fn zielonka(g: &ParityGame) -> Solution {
    let n = g.len();
    let mut work = g.clone();
    // sinks: index n is won by Eve (priority 0), n + 1 by Adam (priority 1)
    let eve_sink = work.add_node(Owner::Eve, 0);
    let adam_sink = work.add_node(Owner::Adam, 1);
    work.add_edge(eve_sink, eve_sink);
    work.add_edge(adam_sink, adam_sink);
    for v in 0..n {
        if work.succ[v].is_empty() {
            let sink = match g.owner(v) {
                Owner::Eve => adam_sink,
                Owner::Adam => eve_sink,
            };
            work.add_edge(v, sink);
        }
    }
    let all: BTreeSet<usize> = (0..work.len()).collect();
    let (w, strat) = solve(&work, &all);
    let mut out = Solution::default();
    for v in 0..n {
        let won_by = if w[0].contains(&v) { Owner::Eve } else { Owner::Adam };
        match won_by {
            Owner::Eve => out.win_eve.insert(v),
            Owner::Adam => out.win_adam.insert(v),
        };
        if g.owner(v) == won_by && !g.successors(v).is_empty() {
            let s = strat[v].expect("winner has a strategy on its own nodes");
            match won_by {
                Owner::Eve => out.strategy_eve.insert(v, s),
                Owner::Adam => out.strategy_adam.insert(v, s),
            };
        }
    }
    out
}

fn idx(p: Owner) -> usize {
    match p {
        Owner::Eve => 0,
        Owner::Adam => 1,
    }
}

type Regions = [BTreeSet<usize>; 2];

/// Solves the subgame induced by `nodes`, which must be a trap-closed arena
/// where every node keeps a successor.
fn solve(g: &ParityGame, nodes: &BTreeSet<usize>) -> (Regions, Vec<Option<usize>>) {
    let mut strat = vec![None; g.len()];
    if nodes.is_empty() {
        return ([BTreeSet::new(), BTreeSet::new()], strat);
    }
    let p = nodes.iter().map(|&v| g.priority(v)).max().unwrap();
    let i = Owner::of_priority(p);
    let top: BTreeSet<usize> = nodes.iter().copied().filter(|&v| g.priority(v) == p).collect();
    let a = attractor(g, nodes, &top, i, &mut strat);
    let rest: BTreeSet<usize> = nodes.difference(&a).copied().collect();
    let (w1, s1) = solve(g, &rest);
    merge(&mut strat, &s1, &rest);
    if w1[idx(i.opponent())].is_empty() {
        for &v in &top {
            if g.owner(v) == i {
                strat[v] = g.successors(v).iter().copied().find(|w| nodes.contains(w));
            }
        }
        let mut w: Regions = [BTreeSet::new(), BTreeSet::new()];
        w[idx(i)] = nodes.clone();
        return (w, strat);
    }
    let mut strat = vec![None; g.len()];
    merge(&mut strat, &s1, &w1[idx(i.opponent())]);
    let b = attractor(g, nodes, &w1[idx(i.opponent())], i.opponent(), &mut strat);
    let rest2: BTreeSet<usize> = nodes.difference(&b).copied().collect();
    let (w2, s2) = solve(g, &rest2);
    merge(&mut strat, &s2, &rest2);
    let mut w = w2;
    w[idx(i.opponent())].extend(b);
    (w, strat)
}

fn merge(into: &mut [Option<usize>], from: &[Option<usize>], on: &BTreeSet<usize>) {
    for &v in on {
        if from[v].is_some() {
            into[v] = from[v];
        }
    }
}

/// Attractor of `target` for `player` inside `nodes`; records the player's
/// moves towards the target on attracted nodes outside it.
fn attractor(
    g: &ParityGame,
    nodes: &BTreeSet<usize>,
    target: &BTreeSet<usize>,
    player: Owner,
    strat: &mut [Option<usize>],
) -> BTreeSet<usize> {
    let mut rank: BTreeMap<usize, usize> = target.iter().map(|&v| (v, 0)).collect();
    let mut queue: VecDeque<usize> = target.iter().copied().collect();
    let mut preds: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut remaining: BTreeMap<usize, usize> = BTreeMap::new();
    for &v in nodes {
        let inside: Vec<usize> = g.successors(v).iter().copied().filter(|w| nodes.contains(w)).collect();
        remaining.insert(v, inside.len());
        for w in inside {
            preds.entry(w).or_default().push(v);
        }
    }
    while let Some(u) = queue.pop_front() {
        let r = rank[&u];
        for &v in preds.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
            if rank.contains_key(&v) {
                continue;
            }
            let left = remaining.get_mut(&v).unwrap();
            *left -= 1;
            if g.owner(v) == player || *left == 0 {
                rank.insert(v, r + 1);
                queue.push_back(v);
            }
        }
    }
    for (&v, &r) in &rank {
        if r > 0 && g.owner(v) == player {
            strat[v] = g
                .successors(v)
                .iter()
                .copied()
                .filter(|w| rank.get(w).is_some_and(|&rw| rw < r))
                .min_by_key(|w| (rank[w], *w));
        }
    }
    rank.into_keys().collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BruteError {
    #[error("game has {0} nodes, brute force is limited to {MAX_BRUTE_NODES}")]
    TooManyNodes(usize),
    #[error("{0} strategy pairs exceed the enumeration limit")]
    TooManyStrategies(u128),
}

pub const MAX_BRUTE_NODES: usize = 12;
const MAX_STRATEGY_PAIRS: u128 = 50_000_000;

/// Enumerates every pair of memoryless strategies.
pub fn solve_brute(g: &ParityGame) -> Result<Solution, BruteError> {
    let n = g.len();
    if n > MAX_BRUTE_NODES {
        return Err(BruteError::TooManyNodes(n));
    }
    let choosers = |p: Owner| -> Vec<usize> {
        (0..n).filter(|&v| g.owner(v) == p && !g.successors(v).is_empty()).collect()
    };
    let eve_nodes = choosers(Owner::Eve);
    let adam_nodes = choosers(Owner::Adam);
    let count = |vs: &[usize]| vs.iter().map(|&v| g.successors(v).len() as u128).product::<u128>();
    let pairs = count(&eve_nodes) * count(&adam_nodes);
    if pairs > MAX_STRATEGY_PAIRS {
        return Err(BruteError::TooManyStrategies(pairs));
    }
    let eve_strats = strategies(g, &eve_nodes);
    let adam_strats = strategies(g, &adam_nodes);

    let mut win_eve = BTreeSet::new();
    for v in 0..n {
        let beats_all = |s: &Vec<usize>| adam_strats.iter().all(|t| play(g, v, &eve_nodes, s, &adam_nodes, t) == Owner::Eve);
        if eve_strats.iter().any(beats_all) {
            win_eve.insert(v);
        }
    }
    let win_adam: BTreeSet<usize> = (0..n).filter(|v| !win_eve.contains(v)).collect();

    // a single strategy per player that wins from its whole region
    let uniform = |mine: &[usize], mine_strats: &[Vec<usize>], theirs: &[usize], their_strats: &[Vec<usize>], region: &BTreeSet<usize>, me: Owner| {
        mine_strats
            .iter()
            .find(|s| {
                region.iter().all(|&v| {
                    their_strats.iter().all(|t| {
                        let winner = match me {
                            Owner::Eve => play(g, v, mine, s, theirs, t),
                            Owner::Adam => play(g, v, theirs, t, mine, s),
                        };
                        winner == me
                    })
                })
            })
            .cloned()
    };
    let se = uniform(&eve_nodes, &eve_strats, &adam_nodes, &adam_strats, &win_eve, Owner::Eve)
        .expect("memoryless determinacy");
    let sa = uniform(&adam_nodes, &adam_strats, &eve_nodes, &eve_strats, &win_adam, Owner::Adam)
        .expect("memoryless determinacy");
    let pick = |nodes: &[usize], s: &[usize], region: &BTreeSet<usize>| -> BTreeMap<usize, usize> {
        nodes
            .iter()
            .zip(s)
            .filter(|(v, _)| region.contains(v))
            .map(|(&v, &i)| (v, g.successors(v)[i]))
            .collect()
    };
    Ok(Solution {
        strategy_eve: pick(&eve_nodes, &se, &win_eve),
        strategy_adam: pick(&adam_nodes, &sa, &win_adam),
        win_eve,
        win_adam,
    })
}

/// All choice vectors, as successor indices per node in `nodes`.
fn strategies(g: &ParityGame, nodes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &v in nodes {
        let k = g.successors(v).len();
        out = out
            .into_iter()
            .flat_map(|s| {
                (0..k).map(move |i| {
                    let mut s = s.clone();
                    s.push(i);
                    s
                })
            })
            .collect();
    }
    out
}

/// Winner of the unique play from `start` under both strategies.
fn play(g: &ParityGame, start: usize, eve: &[usize], se: &[usize], adam: &[usize], sa: &[usize]) -> Owner {
    let next = |v: usize| -> Option<usize> {
        let (nodes, s) = match g.owner(v) {
            Owner::Eve => (eve, se),
            Owner::Adam => (adam, sa),
        };
        nodes.iter().position(|&x| x == v).map(|i| g.successors(v)[s[i]])
    };
    let mut seen: Vec<usize> = Vec::new();
    let mut v = start;
    loop {
        if let Some(pos) = seen.iter().position(|&x| x == v) {
            let max = seen[pos..].iter().map(|&x| g.priority(x)).max().unwrap();
            return Owner::of_priority(max);
        }
        seen.push(v);
        match next(v) {
            Some(w) => v = w,
            None => return g.owner(v).opponent(),
        }
    }
}

/// Checks that each player's strategy is winning on its region by graph
/// inspection: the region is closed under the strategy and opponent moves,
/// and every reachable cycle has a maximal priority of the right parity.
pub fn check_strategies(g: &ParityGame, s: &Solution) -> Result<(), String> {
    check_player(g, &s.win_eve, &s.strategy_eve, Owner::Eve)?;
    check_player(g, &s.win_adam, &s.strategy_adam, Owner::Adam)
}

fn check_player(g: &ParityGame, region: &BTreeSet<usize>, strat: &BTreeMap<usize, usize>, me: Owner) -> Result<(), String> {
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for &v in region {
        if g.owner(v) == me {
            if g.successors(v).is_empty() {
                return Err(format!("node {} is a dead end for its owner but in its region", v));
            }
            let Some(&w) = strat.get(&v) else {
                return Err(format!("no strategy at node {}", v));
            };
            if !g.successors(v).contains(&w) || !region.contains(&w) {
                return Err(format!("strategy at node {} leaves the region", v));
            }
            edges.push((v, w));
        } else {
            for &w in g.successors(v) {
                if !region.contains(&w) {
                    return Err(format!("opponent escapes the region at node {}", v));
                }
                edges.push((v, w));
            }
        }
    }
    let bad_parity = match me {
        Owner::Eve => 1,
        Owner::Adam => 0,
    };
    let mut bad: Vec<u32> = region
        .iter()
        .map(|&v| g.priority(v))
        .filter(|p| p % 2 == bad_parity)
        .collect();
    bad.sort_unstable();
    bad.dedup();
    for p in bad {
        // a cycle whose maximum is p lives in an SCC of the nodes with priority <= p
        let keep: Vec<usize> = region.iter().copied().filter(|&v| g.priority(v) <= p).collect();
        let mut graph = DiGraph::<usize, ()>::new();
        let ids: BTreeMap<usize, _> = keep.iter().map(|&v| (v, graph.add_node(v))).collect();
        for &(a, b) in &edges {
            if let (Some(&x), Some(&y)) = (ids.get(&a), ids.get(&b)) {
                graph.add_edge(x, y, ());
            }
        }
        for scc in tarjan_scc(&graph) {
            let cyclic = scc.len() > 1 || graph.contains_edge(scc[0], scc[0]);
            if cyclic && scc.iter().any(|&x| g.priority(graph[x]) == p) {
                return Err(format!("a cycle through node {} has maximal priority {}", graph[scc[0]], p));
            }
        }
    }
    Ok(())
}
