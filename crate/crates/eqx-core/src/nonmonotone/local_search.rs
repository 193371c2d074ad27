//! Local search for additive objective instances with a single chore among
//! goods, or a single good among chores.

use std::collections::BTreeSet;

use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::instance::{Instance, ItemClass, Valuation};
use crate::monotone::{SolveStats, Termination};
use crate::nonmonotone::lex::{sigma_permutation, SigmaDirection};
use crate::verify::check_eqx;
use crate::Value;

/// The one item whose class differs from all the others.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Special {
    Chore,
    Good,
}

/// Default cap on item transfers before the search gives up.
pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;

/// Runs the local search with the default step budget; see
/// [`single_special_local_search_traced`].
pub fn single_special_local_search(
    instance: &Instance,
    special: Special,
) -> Result<(Allocation, SolveStats)> {
    single_special_local_search_traced(instance, special, DEFAULT_STEP_BUDGET)
        .map(|(allocation, stats, _)| (allocation, stats))
}

/// Local search starting from everything in agent 0's bundle.
///
/// For a single chore: while the allocation is not EQx, goods violations are
/// resolved by moving the offending good to the first agent of the σ
/// ordering (a poorest agent), and then, if the chore holder's cutoff value
/// v⁺ — its bundle value without the chore — is below the richest agent's
/// value, the chore moves to that richest agent. The single-good variant
/// mirrors this with the orderings reversed. Violating pairs are picked by
/// lowest agent index, then lowest item index.
///
/// Returns the allocation, the stats, and the trace of cutoff values
/// recorded just before each transfer of the special item; the trace is
/// strictly increasing for a chore and strictly decreasing for a good,
/// which is the progress measure guaranteeing termination.
pub fn single_special_local_search_traced(
    instance: &Instance,
    special: Special,
    step_budget: u64,
) -> Result<(Allocation, SolveStats, Vec<Value>)> {
    let n = instance.agent_count();
    let m = instance.item_count();
    let rows = additive_rows(instance)?;
    let classes = instance.classify_items()?;
    if !classes.objective {
        return Err(Error::Precondition(
            "instance has a mixed item; local search needs objective valuations".into(),
        ));
    }
    let (special_class, regular_class, direction) = match special {
        Special::Chore => (ItemClass::Chore, ItemClass::Good, SigmaDirection::ChoresIdentical),
        Special::Good => (ItemClass::Good, ItemClass::Chore, SigmaDirection::GoodsIdentical),
    };
    let specials: Vec<usize> = classes
        .items
        .iter()
        .enumerate()
        .filter(|(_, c)| **c == special_class)
        .map(|(x, _)| x)
        .collect();
    if specials.len() != 1 {
        return Err(Error::Precondition(format!(
            "expected exactly one {special_class:?}, found {}",
            specials.len()
        )));
    }
    let special_item = specials[0];

    let calls_before = instance.oracle_calls();
    let full: BTreeSet<usize> = (0..m).collect();
    let v_max = (0..n)
        .map(|i| instance.value(i, &full).map(|v| v.unsigned_abs()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);

    let mut allocation = Allocation::empty(n, m);
    for item in 0..m {
        allocation.assign(item, 0);
    }
    let mut values = vec![0 as Value; n];
    values[0] = instance.valuation(0).eval(allocation.bundle(0))?;

    let mut stats = SolveStats {
        outer_iterations: 0,
        add_steps: 0,
        fix_steps: 0,
        oracle_calls: 0,
        v_max: Value::try_from(v_max).map_err(|_| Error::Overflow("grand bundle magnitude"))?,
        terminated_by: Termination::EmptyPool,
    };
    let mut cutoff_trace: Vec<Value> = Vec::new();
    let mut transfers: u64 = 0;
    let budget_exhausted = || {
        Error::BudgetExceeded(format!(
            "local search exceeded its step budget of {step_budget} transfers"
        ))
    };

    while !check_eqx(instance, &allocation)?.is_eqx {
        stats.outer_iterations += 1;

        // Resolve all violations among the regular items, moving each
        // offender to the front of the σ ordering.
        loop {
            let front = sigma_permutation(instance, &allocation, direction)?[0];
            let candidate = find_regular_violation(
                &allocation,
                &rows,
                &values,
                &classes.items,
                regular_class,
                front,
                special,
            );
            let Some((from, item)) = candidate else { break };
            // The extreme value (minimum for the chore variant, maximum for
            // the good variant) never worsens inside this loop.
            let before = extreme_value(&values, special);
            transfer(&mut allocation, &mut values, &rows, item, from, front)?;
            stats.add_steps += 1;
            transfers += 1;
            if transfers > step_budget {
                return Err(budget_exhausted());
            }
            let after = extreme_value(&values, special);
            match special {
                Special::Chore => assert!(after >= before, "minimum value decreased"),
                Special::Good => assert!(after <= before, "maximum value increased"),
            }
        }

        // Then a single transfer of the special item if its holder's cutoff
        // is on the wrong side of the extreme agent.
        let order = sigma_permutation(instance, &allocation, direction)?;
        let back = order[n - 1];
        let holder = allocation.holder(special_item).expect("special item is always held");
        let cutoff = values[holder]
            .checked_sub(rows[holder][special_item])
            .ok_or(Error::Overflow("cutoff value"))?;
        let wants_move = match special {
            Special::Chore => cutoff < values[back],
            Special::Good => cutoff > values[back],
        };
        if wants_move {
            if let Some(&previous) = cutoff_trace.last() {
                match special {
                    Special::Chore => assert!(cutoff > previous, "cutoff failed to increase"),
                    Special::Good => assert!(cutoff < previous, "cutoff failed to decrease"),
                }
            }
            cutoff_trace.push(cutoff);
            transfer(&mut allocation, &mut values, &rows, special_item, holder, back)?;
            stats.fix_steps += 1;
            transfers += 1;
            if transfers > step_budget {
                return Err(budget_exhausted());
            }
        }
    }

    stats.oracle_calls = instance.oracle_calls() - calls_before;
    Ok((allocation, stats, cutoff_trace))
}

fn additive_rows(instance: &Instance) -> Result<Vec<&[Value]>> {
    instance
        .valuations()
        .iter()
        .map(|v| match v {
            Valuation::Additive { values } => Ok(values.as_slice()),
            _ => Err(Error::Precondition("valuations must be additive".into())),
        })
        .collect()
}

/// First (agent, item) by index whose removal value is on the wrong side of
/// the front agent's value: for the chore variant a good with
/// v_i(A_i∖g) > v_front(A_front), for the good variant a chore with
/// v_i(A_i∖c) < v_front(A_front).
fn find_regular_violation(
    allocation: &Allocation,
    rows: &[&[Value]],
    values: &[Value],
    classes: &[ItemClass],
    regular_class: ItemClass,
    front: usize,
    special: Special,
) -> Option<(usize, usize)> {
    for agent in 0..allocation.agent_count() {
        if agent == front {
            continue;
        }
        for &item in allocation.bundle(agent) {
            if classes[item] != regular_class {
                continue;
            }
            let without = values[agent] - rows[agent][item];
            let violates = match special {
                Special::Chore => without > values[front],
                Special::Good => without < values[front],
            };
            if violates {
                return Some((agent, item));
            }
        }
    }
    None
}

fn extreme_value(values: &[Value], special: Special) -> Value {
    match special {
        Special::Chore => *values.iter().min().expect("nonempty"),
        Special::Good => *values.iter().max().expect("nonempty"),
    }
}

fn transfer(
    allocation: &mut Allocation,
    values: &mut [Value],
    rows: &[&[Value]],
    item: usize,
    from: usize,
    to: usize,
) -> Result<()> {
    allocation.transfer(item, from, to);
    values[from] = values[from]
        .checked_sub(rows[from][item])
        .ok_or(Error::Overflow("bundle value"))?;
    values[to] = values[to]
        .checked_add(rows[to][item])
        .ok_or(Error::Overflow("bundle value"))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;

    #[test]
    fn table4_single_chore_terminates_eqx() {
        let inst = gen::canonical("table4").unwrap();
        let (allocation, _, trace) =
            single_special_local_search_traced(&inst, Special::Chore, DEFAULT_STEP_BUDGET)
                .unwrap();
        assert!(check_eqx(&inst, &allocation).unwrap().is_eqx);
        assert!(trace.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn goods_only_instance_is_rejected() {
        let inst = Instance::additive(&[vec![3, 1], vec![2, 2]]).unwrap();
        let err = single_special_local_search(&inst, Special::Chore).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn mixed_instance_is_rejected() {
        let inst = gen::canonical("table2").unwrap();
        let err = single_special_local_search(&inst, Special::Chore).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn single_agent_converges_immediately() {
        let inst = Instance::additive(&[vec![5, 3, -2]]).unwrap();
        let (allocation, stats) = single_special_local_search(&inst, Special::Chore).unwrap();
        assert_eq!(allocation.bundle(0).len(), 3);
        assert_eq!(stats.outer_iterations, 0);
    }

    #[test]
    fn random_single_chore_instances_converge(){
        let mut rng = gen::SplitMix64::new(0x5C);
        for round in 0..300 {
            let n = 2 + rng.next_below(3) as usize;
            let goods = 1 + rng.next_below(6) as usize;
            let inst = single_special_instance(&mut rng, n, goods, Special::Chore);
            let (allocation, _, trace) =
                single_special_local_search_traced(&inst, Special::Chore, DEFAULT_STEP_BUDGET)
                    .unwrap();
            assert!(check_eqx(&inst, &allocation).unwrap().is_eqx, "round {round}");
            assert!(trace.windows(2).all(|w| w[0] < w[1]), "round {round}");
        }
    }

    #[test]
    fn random_single_good_instances_converge() {
        let mut rng = gen::SplitMix64::new(0x5D);
        for round in 0..300 {
            let n = 2 + rng.next_below(3) as usize;
            let chores = 1 + rng.next_below(6) as usize;
            let inst = single_special_instance(&mut rng, n, chores, Special::Good);
            let (allocation, _, trace) =
                single_special_local_search_traced(&inst, Special::Good, DEFAULT_STEP_BUDGET)
                    .unwrap();
            assert!(check_eqx(&inst, &allocation).unwrap().is_eqx, "round {round}");
            assert!(trace.windows(2).all(|w| w[0] > w[1]), "round {round}");
        }
    }

    /// `regular_count` regular items plus one special item of the opposite
    /// class, additive objective, values drawn from small magnitudes.
    pub(crate) fn single_special_instance(
        rng: &mut gen::SplitMix64,
        n: usize,
        regular_count: usize,
        special: Special,
    ) -> Instance {
        let m = regular_count + 1;
        let special_at = rng.next_below(m as u64) as usize;
        let rows: Vec<Vec<Value>> = (0..n)
            .map(|_| {
                (0..m)
                    .map(|x| match (x == special_at, special) {
                        (true, Special::Chore) => -rng.next_in(1, 10),
                        (true, Special::Good) => rng.next_in(1, 10),
                        (false, Special::Chore) => rng.next_in(0, 10),
                        (false, Special::Good) => -rng.next_in(1, 10),
                    })
                    .collect()
            })
            .collect();
        Instance::additive(&rows).unwrap()
    }
}
