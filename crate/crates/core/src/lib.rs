//! Combinatorial smoke testing for machine-learning libraries.
//!
//! Synthetic datasets from [`catalog`] are paired with every hyperparameter
//! combination produced by [`combinatorics`] for an algorithm described in
//! YAML ([`descriptor`]). The result is either rendered into test sources
//! ([`emit`]) or executed directly against an adapter process ([`runner`]).

pub mod catalog;
pub mod cli;
pub mod combinatorics;
pub mod datagen;
pub mod descriptor;
pub mod emit;
pub mod mock;
pub mod runner;

/// Seed used when none is given.
pub const DEFAULT_SEED: u64 = 42;
