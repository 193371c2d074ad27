//! Solvers, checkers, oracles, and generators for EQx allocation of
//! indivisible goods and chores.
//!
//! An allocation is *equitable up to any item* (EQx) when removing any good
//! from an agent's bundle makes that agent a poorest agent, and removing any
//! chore makes the agent a richest agent. This crate provides:
//!
//! - a data model for instances with value-oracle valuations ([`instance`],
//!   [`allocation`], [`io`]);
//! - definitional checkers producing complete violation reports ([`verify`]);
//! - the greedy add-and-fix solver for monotone valuations, exact and
//!   approximate ([`monotone`]);
//! - two-agent two-way greedy, the leximin++ ordering, and single-chore /
//!   single-good local search for nonmonotone additive valuations
//!   ([`nonmonotone`]);
//! - a pseudo-polynomial dynamic-programming decision procedure for EQx
//!   existence ([`dp`]);
//! - brute-force ground truth and a weakly-well-layered tester ([`oracle`]);
//! - deterministic instance generators, including number-partitioning
//!   reductions ([`gen`]).
//!
//! All values are exact 64-bit integers; arithmetic is checked and overflow
//! surfaces as a distinct error. Rational comparisons (the ε in approximate
//! EQx) cross-multiply in 128-bit integers, never floating point.

pub mod allocation;
pub mod dp;
pub mod epsilon;
pub mod error;
pub mod gen;
pub mod instance;
pub mod io;
pub mod monotone;
pub mod nonmonotone;
pub mod oracle;
pub mod verify;

pub use allocation::Allocation;
pub use epsilon::Epsilon;
pub use error::{Error, Result};
pub use instance::{Classification, Instance, ItemClass, Valuation};

/// Item values and bundle values. Exact arithmetic with checked overflow.
pub type Value = i64;

/// Monotone direction of an instance: all items goods (valuations
/// nondecreasing) or all items chores (nonincreasing).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Goods,
    Chores,
}
