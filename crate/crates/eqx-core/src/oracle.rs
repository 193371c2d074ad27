//! Exhaustive ground truth: allocation enumeration, brute-force EQx search,
//! and the weakly-well-layered tester.

use std::collections::BTreeSet;

use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::instance::{Instance, Valuation};
use crate::verify::check_eqx;
use crate::{Direction, Value};

/// Default cap on the number of allocations an exhaustive search may visit.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BruteMode {
    /// Stop at the first EQx allocation.
    Any,
    /// Collect every EQx allocation.
    All,
}

/// Number of complete allocations of `m` items to `n` agents, if it fits a
/// u64.
pub fn allocation_count(n: usize, m: usize) -> Option<u64> {
    (n as u128)
        .checked_pow(m as u32)
        .filter(|c| *c <= u64::MAX as u128)
        .map(|c| c as u64)
}

/// All complete allocations in lexicographic item-assignment order: the
/// vector (holder of item 0, holder of item 1, ...) counts up with item 0 as
/// the most significant digit.
pub fn enumerate_allocations(n: usize, m: usize) -> impl Iterator<Item = Allocation> {
    let total = allocation_count(n, m).expect("allocation space exceeds u64");
    (0..total).map(move |index| {
        let mut bundles = vec![BTreeSet::new(); n];
        let mut rest = index;
        for item in (0..m).rev() {
            bundles[(rest % n as u64) as usize].insert(item);
            rest /= n as u64;
        }
        Allocation::complete_from_bundles(bundles, m).expect("enumerated partition")
    })
}

/// Exhaustively searches for EQx allocations. Returns those found in
/// enumeration order (just the first for [`BruteMode::Any`]).
pub fn brute_force_eqx(
    instance: &Instance,
    mode: BruteMode,
    budget: u64,
) -> Result<Vec<Allocation>> {
    let n = instance.agent_count();
    let m = instance.item_count();
    match allocation_count(n, m) {
        Some(total) if total <= budget => {}
        _ => {
            return Err(Error::BudgetExceeded(format!(
                "{n}^{m} allocations exceed the enumeration budget of {budget}"
            )))
        }
    }
    let mut found = Vec::new();
    for allocation in enumerate_allocations(n, m) {
        if check_eqx(instance, &allocation)?.is_eqx {
            found.push(allocation);
            if mode == BruteMode::Any {
                break;
            }
        }
    }
    Ok(found)
}

/// How greedy ties are resolved by the weakly-well-layered tester.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreakMode {
    /// The greedy step always takes the lowest-index item among the
    /// extremal marginals.
    LowestIndex,
    /// Every tie-break resolution is explored; the property must hold along
    /// all of them. Ground sets are capped at 8 items in this mode.
    AllOrders,
}

/// Witness that a valuation is not weakly well-layered: on `ground_subset`,
/// the greedy prefix `greedy_trace` of some cardinality is beaten by
/// `better_set`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WwlCounterexample {
    pub ground_subset: Vec<usize>,
    pub greedy_trace: Vec<usize>,
    pub greedy_value: Value,
    pub better_set: Vec<usize>,
    pub better_value: Value,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WwlReport {
    pub holds: bool,
    pub counterexample: Option<WwlCounterexample>,
}

const MAX_WWL_ITEMS: usize = 12;
const MAX_WWL_ITEMS_ALL_ORDERS: usize = 8;

fn mask_to_vec(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|x| mask & (1 << x) != 0).collect()
}

/// Tests whether a valuation is weakly well-layered over a ground set of
/// `item_count` items: for every subset M' of the ground set, the greedy
/// sequence S_0, S_1, ... (picking the extremal marginal each step) must have
/// v(S_i) extremal among all subsets of M' of cardinality i. `Goods` runs
/// argmax/max, `Chores` the argmin/min mirror.
pub fn is_weakly_well_layered(
    valuation: &Valuation,
    item_count: usize,
    direction: Direction,
    ties: TieBreakMode,
) -> Result<WwlReport> {
    let cap = match ties {
        TieBreakMode::LowestIndex => MAX_WWL_ITEMS,
        TieBreakMode::AllOrders => MAX_WWL_ITEMS_ALL_ORDERS,
    };
    if item_count > cap {
        return Err(Error::InvalidInput(format!(
            "ground set of {item_count} items exceeds the exhaustive cap of {cap}"
        )));
    }
    valuation.validate(item_count)?;
    let size = 1usize << item_count;
    let mut dense = Vec::with_capacity(size);
    for mask in 0..size {
        let set: BTreeSet<usize> = mask_to_vec(mask).into_iter().collect();
        dense.push(valuation.eval(&set)?);
    }
    let prefer = |candidate: Value, incumbent: Value| match direction {
        Direction::Goods => candidate > incumbent,
        Direction::Chores => candidate < incumbent,
    };

    for ground in 0..size {
        let card = ground.count_ones() as usize;
        // Extremal value per cardinality over all subsets of `ground`.
        let mut best = vec![None::<Value>; card + 1];
        let mut sub = ground;
        loop {
            let k = sub.count_ones() as usize;
            let v = dense[sub];
            if best[k].is_none() || prefer(v, best[k].unwrap()) {
                best[k] = Some(v);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & ground;
        }
        let best = |k: usize| best[k].unwrap();

        let fail = |prefix: usize, trace: &[usize]| -> WwlCounterexample {
            let k = trace.len();
            let mut better = 0usize;
            let mut sub = ground;
            loop {
                if sub.count_ones() as usize == k && dense[sub] == best(k) {
                    better = sub;
                    break;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & ground;
            }
            WwlCounterexample {
                ground_subset: mask_to_vec(ground),
                greedy_trace: trace.to_vec(),
                greedy_value: dense[prefix],
                better_set: mask_to_vec(better),
                better_value: best(k),
            }
        };

        match ties {
            TieBreakMode::LowestIndex => {
                let mut prefix = 0usize;
                let mut trace = Vec::with_capacity(card);
                for step in 1..=card {
                    let mut pick = None;
                    for x in 0..item_count {
                        let bit = 1 << x;
                        if ground & bit == 0 || prefix & bit != 0 {
                            continue;
                        }
                        let v = dense[prefix | bit];
                        match pick {
                            None => pick = Some((x, v)),
                            Some((_, pv)) if prefer(v, pv) => pick = Some((x, v)),
                            _ => {}
                        }
                    }
                    let (x, _) = pick.expect("nonempty remainder");
                    prefix |= 1 << x;
                    trace.push(x);
                    if dense[prefix] != best(step) {
                        return Ok(WwlReport { holds: false, counterexample: Some(fail(prefix, &trace)) });
                    }
                }
            }
            TieBreakMode::AllOrders => {
                // DFS over every argmax (argmin) choice; memoized on the
                // reached prefix set since the remainder behaves identically.
                let mut visited = vec![false; size];
                let mut stack: Vec<(usize, Vec<usize>)> = vec![(0, Vec::new())];
                while let Some((prefix, trace)) = stack.pop() {
                    if visited[prefix] {
                        continue;
                    }
                    visited[prefix] = true;
                    let step = trace.len() + 1;
                    if step > card {
                        continue;
                    }
                    let mut extremal = None;
                    for x in 0..item_count {
                        let bit = 1 << x;
                        if ground & bit == 0 || prefix & bit != 0 {
                            continue;
                        }
                        let v = dense[prefix | bit];
                        if extremal.is_none() || prefer(v, extremal.unwrap()) {
                            extremal = Some(v);
                        }
                    }
                    let extremal = extremal.expect("nonempty remainder");
                    for x in 0..item_count {
                        let bit = 1 << x;
                        if ground & bit == 0 || prefix & bit != 0 || dense[prefix | bit] != extremal
                        {
                            continue;
                        }
                        let next = prefix | bit;
                        let mut next_trace = trace.clone();
                        next_trace.push(x);
                        if dense[next] != best(step) {
                            return Ok(WwlReport {
                                holds: false,
                                counterexample: Some(fail(next, &next_trace)),
                            });
                        }
                        stack.push((next, next_trace));
                    }
                }
            }
        }
    }
    Ok(WwlReport { holds: true, counterexample: None })
}
