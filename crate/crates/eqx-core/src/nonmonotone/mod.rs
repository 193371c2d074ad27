//! Solvers for nonmonotone additive instances: the two-agent two-way greedy
//! algorithm, the leximin++ ordering machinery, and local search for
//! instances with a single chore (or a single good).

mod lex;
mod local_search;
mod two_way;

pub use lex::{leximin_pp, precplus, sigma_permutation, SigmaDirection};
pub use local_search::{
    single_special_local_search, single_special_local_search_traced, Special, DEFAULT_STEP_BUDGET,
};
pub use two_way::two_way_greedy;
