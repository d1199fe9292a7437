//! The parity game over typing sequents and its solvers.
//!
//! From `Eve(F, θ)` Eve picks a minimal assumption map `Δ` under which the
//! body of `F` has type `θ`; Adam then picks one assumption `(c, θ')` of some
//! `F'`, and play continues at `Eve(F', θ')` after passing a color node of
//! priority `c + 2` (or 1 for `ε`). Eve wins iff the value tree is accepted.

mod build;
mod parity;

pub use build::{
    accepted_states, assumptions_le, build_game, build_game_with, eve_moves, join, Analysis, Assumptions,
    BuildOptions, GameError, GameNode, HorsGame,
};
pub use parity::{check_strategies, solve_brute, zielonka, BruteError, Owner, ParityGame, Solution, MAX_BRUTE_NODES};
