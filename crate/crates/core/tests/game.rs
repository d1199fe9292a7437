mod common;

use common::*;
use homc::automata::{run_search, Color, State};
use homc::format::parse_hors;
use homc::game::{
    accepted_states, build_game, check_strategies, solve_brute, zielonka, Analysis, BuildOptions, GameNode, Owner,
};
use homc::syntax::unfold;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn names(m: &homc::automata::Apt, qs: &BTreeSet<State>) -> Vec<String> {
    qs.iter().map(|&q| m.name(q).to_string()).collect()
}

#[test]
fn fixture_verdicts() {
    let expect: &[(&str, &str, &[&str])] = &[
        ("ex1.hors", "ex1.apt", &["q0", "q1"]),
        ("loop.hors", "loop-omega1.apt", &[]),
        ("loop.hors", "loop-omega2.apt", &["q"]),
        ("const.hors", "const.apt", &["q"]),
        ("alternate.hors", "alternate.apt", &["qa", "qb"]),
        ("only-a.hors", "alternate.apt", &[]),
    ];
    for &(s, a, want) in expect {
        let (h, m) = (hors(s), apt(a));
        let got = accepted_states(&h, &m).unwrap();
        assert_eq!(names(&m, &got), want, "{} / {}", s, a);
    }
}

#[test]
fn order0_schemes_match_the_acceptance_game() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut accepted = 0;
    for i in 0..300 {
        let h = random_order0(&mut rng);
        let m = random_apt(&mut rng, ORDER0_TERMINALS, 3, 3);
        let got = accepted_states(&h, &m).unwrap();
        let want = regular_accepting(&h, &m);
        assert_eq!(got, want, "case {}\n{}\n{}", i, homc::format::print_hors(&h), homc::format::print_apt(&m));
        accepted += got.len();
    }
    assert!(accepted > 50, "too few accepting cases to be informative: {}", accepted);
}

const ALTERNATE_0: &str = "terminals:\n  a : 1\n  b : 1\n  c : 0\nnonterminals:\n  S : o\n  T : o\nstart: S\nrules:\n  S = a T\n  T = b S\n";
const ONLY_A_0: &str = "terminals:\n  a : 1\n  b : 1\n  c : 0\nnonterminals:\n  S : o\nstart: S\nrules:\n  S = a S\n";

#[test]
fn order2_fixtures_agree_with_order0_equivalents() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pairs = [
        (hors("alternate.hors"), parse_hors(ALTERNATE_0).unwrap()),
        (hors("only-a.hors"), parse_hors(ONLY_A_0).unwrap()),
    ];
    for i in 0..150 {
        let m = random_apt(&mut rng, &[("a", 1), ("b", 1), ("c", 0)], 2, 4);
        for (h2, h0) in &pairs {
            assert_eq!(
                accepted_states(h2, &m).unwrap(),
                regular_accepting(h0, &m),
                "case {}\n{}",
                i,
                homc::format::print_apt(&m)
            );
        }
    }
}

/// With even colors only, acceptance is a safety property and can be
/// refuted on a finite prefix.
#[test]
fn order1_safety_matches_prefix_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    let mut rejected = 0;
    while checked < 150 {
        let h = random_order1(&mut rng);
        if unfold(&h, 14).is_err() {
            continue;
        }
        let mut m = random_apt(&mut rng, ORDER0_TERMINALS, 2, 0);
        while m.states().any(|q| m.omega(q) % 2 == 1) {
            m = random_apt(&mut rng, ORDER0_TERMINALS, 2, 0);
        }
        let got = accepted_states(&h, &m).unwrap();
        for q in m.states() {
            let prefix_ok = (1..=14).all(|d| run_search(&m, &unfold(&h, d).unwrap(), q));
            assert_eq!(
                got.contains(&q),
                prefix_ok,
                "{}\n{}\nstate {}",
                homc::format::print_hors(&h),
                homc::format::print_apt(&m),
                m.name(q)
            );
            rejected += usize::from(!prefix_ok);
        }
        checked += 1;
    }
    assert!(rejected > 10 && rejected < 280, "uninformative sample: {} rejections", rejected);
}

#[test]
fn zielonka_agrees_with_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..200 {
        let g = random_game(&mut rng, 8, 5);
        let z = zielonka(&g);
        let b = solve_brute(&g).unwrap();
        assert_eq!(z.win_eve, b.win_eve, "game {}: {:?}", i, g);
        check_strategies(&g, &z).unwrap_or_else(|e| panic!("game {}: {}\n{:?}", i, e, g));
        check_strategies(&g, &b).unwrap_or_else(|e| panic!("brute game {}: {}\n{:?}", i, e, g));
    }
}

#[test]
fn strategy_checker_rejects_tampered_solutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut caught = 0;
    for _ in 0..200 {
        let g = random_game(&mut rng, 8, 5);
        let mut s = zielonka(&g);
        let Some(&v) = s.win_eve.iter().find(|&&v| g.owner(v) == Owner::Eve && !g.successors(v).is_empty()) else {
            continue;
        };
        let Some(&bad) = g.successors(v).iter().find(|w| s.win_adam.contains(w)) else {
            continue;
        };
        s.strategy_eve.insert(v, bad);
        assert!(check_strategies(&g, &s).is_err());
        caught += 1;
    }
    assert!(caught > 5);
}

#[test]
fn construction_is_deterministic() {
    for &(s, a) in PAIRS {
        let (h, m) = (hors(s), apt(a));
        let x = build_game(&h, &m).unwrap();
        let y = build_game(&h, &m).unwrap();
        assert_eq!(x.nodes, y.nodes);
        assert_eq!(x.arena, y.arena);
        assert_eq!(x.to_dot(&m), y.to_dot(&m));
        assert_eq!(zielonka(&x.arena), zielonka(&y.arena));
    }
}

#[test]
fn priorities_encode_colors() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut games: Vec<_> = PAIRS.iter().map(|&(s, a)| (hors(s), apt(a))).collect();
    for _ in 0..20 {
        let h = random_order0(&mut rng);
        games.push((h, random_apt(&mut rng, ORDER0_TERMINALS, 3, 4)));
    }
    for (h, m) in &games {
        let g = build_game(h, m).unwrap();
        for (i, n) in g.nodes.iter().enumerate() {
            let p = g.arena.priority(i);
            assert_eq!(p, n.priority());
            assert_eq!(g.arena.owner(i), n.owner());
            match n {
                GameNode::Color { color: Color::Eps, .. } => assert_eq!(p, 1),
                GameNode::Color { color: Color::Nat(c), .. } => assert_eq!(p, c + 2),
                _ => assert_eq!(p, 1),
            }
        }
        // color nodes are the only way back to an Eve node
        for v in 0..g.arena.len() {
            for &w in g.arena.successors(v) {
                if matches!(g.nodes[w], GameNode::Eve { .. }) {
                    assert!(matches!(g.nodes[v], GameNode::Color { .. }));
                }
            }
        }
    }
}

#[test]
fn node_guard_is_reported() {
    let (h, m) = (hors("ex1.hors"), apt("ex1.apt"));
    let opts = BuildOptions {
        max_nodes: 3,
        ..BuildOptions::default()
    };
    assert!(Analysis::run(&h, &m, &[State(0)], &opts).is_err());
}

#[test]
fn seeds_are_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..40 {
        let h = random_order0(&mut rng);
        let m = random_apt(&mut rng, ORDER0_TERMINALS, 3, 3);
        let all = accepted_states(&h, &m).unwrap();
        let q = State(rng.gen_range(0..m.num_states()) as u32);
        let one = Analysis::run(&h, &m, &[q], &BuildOptions::default()).unwrap();
        assert_eq!(one.accepts(q), all.contains(&q));
    }
}
