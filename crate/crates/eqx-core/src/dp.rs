//! Pseudo-polynomial decision procedure for EQx existence under additive
//! subjective valuations with a small, fixed number of agents.
//!
//! A forward pass over the items maintains the set of reachable states
//! (per agent: bundle value, minimum-valued good, maximum-valued chore),
//! then a final scan accepts any state in which every value gap is closed by
//! removing the richer agent's worst good or the poorer agent's best chore.
//! The state set is kept sparse with predecessor links instead of a dense
//! table, which has identical semantics at a fraction of the memory.

use std::collections::BTreeMap;

use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::instance::{Instance, Valuation};
use crate::verify::check_eqx;
use crate::Value;

/// Agent cap: the state space is exponential in the number of agents.
pub const MAX_DP_AGENTS: usize = 4;

/// Default cap on reachable states per layer.
pub const DEFAULT_STATE_BUDGET: usize = 10_000_000;

/// Per-agent component of a DP state. `min_good` and `max_chore` are absent
/// until the bundle holds a good (zero values included) or a chore.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct AgentState {
    value: Value,
    min_good: Option<Value>,
    max_chore: Option<Value>,
}

type StateKey = Vec<AgentState>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DpOutcome {
    pub exists: bool,
    /// A concrete EQx allocation, reconstructed through predecessor links
    /// when requested and one exists.
    pub witness: Option<Allocation>,
}

/// Decides EQx existence with the default state budget.
pub fn dp_exists(instance: &Instance, want_witness: bool) -> Result<DpOutcome> {
    dp_exists_with_budget(instance, want_witness, DEFAULT_STATE_BUDGET)
}

pub fn dp_exists_with_budget(
    instance: &Instance,
    want_witness: bool,
    state_budget: usize,
) -> Result<DpOutcome> {
    let n = instance.agent_count();
    let m = instance.item_count();
    if n > MAX_DP_AGENTS {
        return Err(Error::Precondition(format!(
            "the decision procedure handles at most {MAX_DP_AGENTS} agents, got {n}"
        )));
    }
    let rows: Vec<&[Value]> = instance
        .valuations()
        .iter()
        .map(|v| match v {
            Valuation::Additive { values } => Ok(values.as_slice()),
            _ => Err(Error::Precondition("the decision procedure needs additive valuations".into())),
        })
        .collect::<Result<_>>()?;

    let item_magnitude = rows
        .iter()
        .flat_map(|row| row.iter())
        .map(|v| v.unsigned_abs())
        .max()
        .unwrap_or(0) as u128;
    // (2mH+1)^n (H+2)^{2n} bounds the distinct (value, good, chore) profiles.
    let sanity_bound = (2 * m as u128 * item_magnitude + 1)
        .saturating_pow(n as u32)
        .saturating_mul((item_magnitude + 2).saturating_pow(2 * n as u32));

    // Layer j maps each state reachable with the first j items to the state
    // it came from and the agent that received item j−1.
    let empty_state: StateKey = vec![
        AgentState { value: 0, min_good: None, max_chore: None };
        n
    ];
    let mut layers: Vec<BTreeMap<StateKey, Option<(StateKey, usize)>>> = Vec::with_capacity(m + 1);
    layers.push(BTreeMap::from([(empty_state, None)]));

    for item in 0..m {
        let mut next: BTreeMap<StateKey, Option<(StateKey, usize)>> = BTreeMap::new();
        for state in layers[item].keys() {
            for (agent, row) in rows.iter().enumerate() {
                let moved = give(state, agent, row[item])?;
                next.entry(moved).or_insert_with(|| Some((state.clone(), agent)));
            }
        }
        if next.len() > state_budget {
            return Err(Error::BudgetExceeded(format!(
                "{} reachable states after item {item} exceed the budget of {state_budget}",
                next.len()
            )));
        }
        debug_assert!((next.len() as u128) <= sanity_bound);
        layers.push(next);
    }

    let accepted = layers[m].keys().find(|state| accepting(state));
    let Some(accepted) = accepted else {
        return Ok(DpOutcome { exists: false, witness: None });
    };
    if !want_witness {
        return Ok(DpOutcome { exists: true, witness: None });
    }

    let mut allocation = Allocation::empty(n, m);
    let mut cursor = accepted.clone();
    for item in (0..m).rev() {
        let (previous, agent) = layers[item + 1][&cursor]
            .clone()
            .expect("non-initial layers always have parents");
        allocation.assign(item, agent);
        cursor = previous;
    }
    debug_assert!(check_eqx(instance, &allocation)?.is_eqx);
    Ok(DpOutcome { exists: true, witness: Some(allocation) })
}

/// Transition: hand the next item, valued `v` by `agent`, to that agent.
/// Nonnegative values are goods (and tighten the minimum good, zeros
/// included); negative values are chores.
fn give(state: &StateKey, agent: usize, v: Value) -> Result<StateKey> {
    let mut next = state.clone();
    let slot = &mut next[agent];
    slot.value = slot
        .value
        .checked_add(v)
        .ok_or(Error::Overflow("bundle value in the decision procedure"))?;
    if v >= 0 {
        slot.min_good = Some(slot.min_good.map_or(v, |h| h.min(v)));
    } else {
        slot.max_chore = Some(slot.max_chore.map_or(v, |d| d.max(v)));
    }
    Ok(next)
}

/// EQx acceptance: for every ordered pair with w_j > w_i, the richer agent's
/// minimum good (if any) must close the gap from above and the poorer
/// agent's maximum chore (if any) from below.
fn accepting(state: &StateKey) -> bool {
    let n = state.len();
    for i in 0..n {
        for j in 0..n {
            if i == j || state[j].value <= state[i].value {
                continue;
            }
            if let Some(h) = state[j].min_good {
                if state[j].value - h > state[i].value {
                    return false;
                }
            }
            if let Some(d) = state[i].max_chore {
                if state[i].value - d < state[j].value {
                    return false;
                }
            }
        }
    }
    true
}
