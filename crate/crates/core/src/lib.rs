//! Higher-order model checking of recursion schemes against alternating parity
//! tree automata, through colored intersection types and parity games, with
//! extraction of accepting run-trees as annotated schemes.

pub mod automata;
pub mod cli;
pub mod format;
pub mod game;
pub mod itypes;
pub mod selection;
pub mod syntax;
pub mod typing;

#[cfg(test)]
pub(crate) mod testing;
