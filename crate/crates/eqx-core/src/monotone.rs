//! Greedy add-and-fix solver for monotone valuations, exact and approximate.
//!
//! In the goods direction, each outer iteration selects a poorest agent p
//! and a second-poorest p'. The Add phase hands p unassigned goods of
//! maximum marginal value while p stays at or below p'; the Fix phase then
//! returns any good whose removal would still leave p strictly above p'.
//! The chores direction mirrors this with the richest pair and
//! minimum-marginal selection. The approximate variant relaxes both loop
//! conditions by the factor (1−ε) for goods or (1+ε) for chores.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::epsilon::Epsilon;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::verify;
use crate::{Direction, Value};

/// How a solver run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// All items placed.
    EmptyPool,
    /// A step budget ran out (local search only; surfaced alongside the
    /// budget error).
    BudgetExceeded,
}

/// Counters recorded by the solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub outer_iterations: u64,
    pub add_steps: u64,
    pub fix_steps: u64,
    pub oracle_calls: u64,
    /// Largest absolute grand-bundle value max_i |v_i(M)|, the scale factor
    /// in the pseudo-polynomial iteration bounds.
    pub v_max: Value,
    pub terminated_by: Termination,
}

/// Computes an EQx allocation for monotone valuations (nondecreasing for
/// `Goods`, nonincreasing for `Chores`).
///
/// Tie-breaking is deterministic: lowest agent index for the extremal-agent
/// selections, lowest item index for the extremal-marginal selections, and
/// the fix scan runs in ascending item order restarting after each removal.
/// Non-monotone inputs are detected opportunistically (a wrong-signed
/// marginal or a failed interim check) and reported as contract errors.
pub fn add_and_fix(instance: &Instance, direction: Direction) -> Result<(Allocation, SolveStats)> {
    add_and_fix_approx(instance, Epsilon::zero(), direction)
}

/// The approximate variant: outputs pass the (1−ε)-EQx check in the goods
/// direction and the (1+ε)-EQx check for chores. ε = 0 degenerates to
/// [`add_and_fix`] exactly.
pub fn add_and_fix_approx(
    instance: &Instance,
    epsilon: Epsilon,
    direction: Direction,
) -> Result<(Allocation, SolveStats)> {
    let n = instance.agent_count();
    let m = instance.item_count();
    let calls_before = instance.oracle_calls();

    let full: BTreeSet<usize> = (0..m).collect();
    let mut grand_magnitudes = Vec::with_capacity(n);
    for i in 0..n {
        grand_magnitudes.push(instance.value(i, &full)?.unsigned_abs());
    }
    let v_max = Value::try_from(grand_magnitudes.iter().copied().max().unwrap_or(0))
        .map_err(|_| Error::Overflow("grand bundle magnitude"))?;

    let mut stats = SolveStats {
        outer_iterations: 0,
        add_steps: 0,
        fix_steps: 0,
        oracle_calls: 0,
        v_max,
        terminated_by: Termination::EmptyPool,
    };

    if n == 1 {
        let mut allocation = Allocation::empty(1, m);
        for item in 0..m {
            allocation.assign(item, 0);
            stats.add_steps += 1;
        }
        stats.oracle_calls = instance.oracle_calls() - calls_before;
        return Ok((allocation, stats));
    }

    let bound = iteration_bound(n, &grand_magnitudes, epsilon, direction);
    let mut allocation = Allocation::empty(n, m);
    let mut values = vec![0 as Value; n];

    while !allocation.unassigned().is_empty() {
        stats.outer_iterations += 1;
        if u128::from(stats.outer_iterations) > bound {
            return Err(Error::Contract(format!(
                "outer-iteration bound {bound} exceeded; a valuation is not monotone {direction:?}"
            )));
        }

        let selected = extremal_agent(&values, direction, None);
        let other = extremal_agent(&values, direction, Some(selected));
        let target = values[other];
        let start_value = values[selected];

        // Add phase.
        while add_condition(epsilon, direction, values[selected], target)
            && !allocation.unassigned().is_empty()
        {
            let mut probe = allocation.bundle(selected).clone();
            let mut best: Option<(usize, Value)> = None;
            for &item in allocation.unassigned() {
                probe.insert(item);
                let with_item = instance.value(selected, &probe)?;
                probe.remove(&item);
                let replace = match best {
                    None => true,
                    Some((_, incumbent)) => match direction {
                        Direction::Goods => with_item > incumbent,
                        Direction::Chores => with_item < incumbent,
                    },
                };
                if replace {
                    best = Some((item, with_item));
                }
            }
            let (item, new_value) = best.expect("pool is nonempty");
            let marginal = new_value
                .checked_sub(values[selected])
                .ok_or(Error::Overflow("marginal value"))?;
            let wrong_sign = match direction {
                Direction::Goods => marginal < 0,
                Direction::Chores => marginal > 0,
            };
            if wrong_sign {
                return Err(Error::Contract(format!(
                    "item {item} has marginal {marginal} for agent {selected}; valuation is not \
                     monotone {direction:?}"
                )));
            }
            allocation.assign(item, selected);
            values[selected] = new_value;
            stats.add_steps += 1;
        }

        // Fix phase: ascending scan, restarted after each removal.
        'fix: loop {
            let mut removal = None;
            for &item in allocation.bundle(selected) {
                let without =
                    instance.value_without(selected, allocation.bundle(selected), Some(item))?;
                if !removal_allowed(epsilon, direction, without, target) {
                    removal = Some((item, without));
                    break;
                }
            }
            match removal {
                Some((item, without)) => {
                    allocation.unassign(item, selected);
                    values[selected] = without;
                    stats.fix_steps += 1;
                }
                None => break 'fix,
            }
        }

        if !allocation.unassigned().is_empty() {
            // The selected agent must have strictly passed the other one,
            // otherwise the Add phase could not have stopped.
            let progressed = match direction {
                Direction::Goods => values[selected] > start_value,
                Direction::Chores => values[selected] < start_value,
            };
            assert!(progressed, "selected agent's value did not strictly move");
            assert!(!add_condition(epsilon, direction, values[selected], target));
        }

        let report = verify::check_eps_eqx_unchecked(instance, &allocation, epsilon, direction)?;
        if !report.is_eqx {
            return Err(Error::Contract(
                "interim allocation failed its equity check; a valuation is not monotone as \
                 claimed"
                    .into(),
            ));
        }
    }

    stats.oracle_calls = instance.oracle_calls() - calls_before;
    Ok((allocation, stats))
}

fn add_condition(epsilon: Epsilon, direction: Direction, selected: Value, target: Value) -> bool {
    match direction {
        Direction::Goods => epsilon.goods_ok(selected, target),
        Direction::Chores => epsilon.chores_ok(selected, target),
    }
}

/// Whether keeping the bundle is fine after hypothetically removing an item
/// that leaves value `without`; the fix phase removes items for which this
/// is false.
fn removal_allowed(epsilon: Epsilon, direction: Direction, without: Value, target: Value) -> bool {
    match direction {
        Direction::Goods => epsilon.goods_ok(without, target),
        Direction::Chores => epsilon.chores_ok(without, target),
    }
}

/// Poorest (goods) or richest (chores) agent, ties to the lowest index,
/// optionally excluding one agent.
fn extremal_agent(values: &[Value], direction: Direction, excluding: Option<usize>) -> usize {
    let mut best: Option<(usize, Value)> = None;
    for (i, &v) in values.iter().enumerate() {
        if Some(i) == excluding {
            continue;
        }
        let replace = match best {
            None => true,
            Some((_, incumbent)) => match direction {
                Direction::Goods => v < incumbent,
                Direction::Chores => v > incumbent,
            },
        };
        if replace {
            best = Some((i, v));
        }
    }
    best.expect("at least one agent").0
}

/// Upper bound on outer iterations: n·V_max + 1 exactly, and additionally
/// Σ_i ⌈log |v_i(M)|⌉ + n + 1 when ε > 0, taken to base 1/(1−ε) for goods
/// and (1+ε) for chores (the per-iteration growth factor of the selected
/// agent's magnitude); the smaller bound applies.
fn iteration_bound(
    n: usize,
    grand_magnitudes: &[u64],
    epsilon: Epsilon,
    direction: Direction,
) -> u128 {
    let v_max = grand_magnitudes.iter().copied().max().unwrap_or(0);
    let exact = n as u128 * v_max as u128 + 1;
    if epsilon.is_zero() {
        return exact;
    }
    let (num, den) = match direction {
        Direction::Goods => (epsilon.denominator(), epsilon.denominator() - epsilon.numerator()),
        Direction::Chores => (epsilon.denominator() + epsilon.numerator(), epsilon.denominator()),
    };
    let mut total: u128 = n as u128 + 1;
    for &g in grand_magnitudes {
        total += u128::from(ceil_log_ratio(num, den, g, exact));
    }
    total.min(exact)
}

/// Smallest k ≥ 0 with (num/den)^k ≥ v, computed exactly; stops early at
/// `cap` since callers clamp the result anyway.
fn ceil_log_ratio(num: u64, den: u64, v: u64, cap: u128) -> u64 {
    if v <= 1 {
        return 0;
    }
    let num = BigUint::from(num);
    let den = BigUint::from(den);
    let mut lhs = BigUint::from(1u32);
    let mut rhs = BigUint::from(v);
    let mut k: u64 = 0;
    while lhs < rhs {
        lhs *= &num;
        rhs *= &den;
        k += 1;
        if u128::from(k) > cap {
            break;
        }
    }
    k
}
