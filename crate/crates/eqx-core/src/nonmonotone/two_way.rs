//! Two-agent greedy solver for additive objective instances with both goods
//! and chores.

use std::collections::BTreeSet;

use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::instance::{Instance, ItemClass, Valuation};
use crate::monotone::{SolveStats, Termination};
use crate::verify::check_eqx;
use crate::Value;

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

/// Computes an EQx allocation for two agents with additive objective
/// valuations.
///
/// Each round the richer agent r (ties to agent 0) keeps the other agent p;
/// p's most valuable unassigned good is weighed against r's most negative
/// unassigned chore, and whichever has the larger absolute value is placed
/// (the good with p, the chore with r). When one class is exhausted the
/// remaining class is always placed. Every interim allocation is EQx, which
/// the solver asserts each round.
pub fn two_way_greedy(instance: &Instance) -> Result<(Allocation, SolveStats)> {
    if instance.agent_count() != 2 {
        return Err(Error::Precondition(format!(
            "two-way greedy needs exactly 2 agents, got {}",
            instance.agent_count()
        )));
    }
    let rows = additive_rows(instance)?;
    let classes = instance.classify_items()?;
    if !classes.objective {
        return Err(Error::Precondition(
            "instance has a mixed item; two-way greedy needs objective valuations".into(),
        ));
    }

    let m = instance.item_count();
    let calls_before = instance.oracle_calls();
    let full: BTreeSet<usize> = (0..m).collect();
    let v_max = (0..2)
        .map(|i| instance.value(i, &full).map(|v| v.unsigned_abs()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .max()
        .unwrap_or(0);

    let mut allocation = Allocation::empty(2, m);
    let mut values = [0 as Value; 2];
    let mut stats = SolveStats {
        outer_iterations: 0,
        add_steps: 0,
        fix_steps: 0,
        oracle_calls: 0,
        v_max: Value::try_from(v_max).map_err(|_| Error::Overflow("grand bundle magnitude"))?,
        terminated_by: Termination::EmptyPool,
    };

    while !allocation.unassigned().is_empty() {
        stats.outer_iterations += 1;
        let richer = if values[1] > values[0] { 1 } else { 0 };
        let poorer = 1 - richer;

        // Best remaining good for the poorer agent, most negative remaining
        // chore for the richer one; ties to the lowest item index.
        let mut best_good: Option<(usize, Value)> = None;
        let mut best_chore: Option<(usize, Value)> = None;
        for &item in allocation.unassigned() {
            match classes.items[item] {
                ItemClass::Good => {
                    let v = rows[poorer][item];
                    if best_good.is_none_or(|(_, incumbent)| v > incumbent) {
                        best_good = Some((item, v));
                    }
                }
                ItemClass::Chore => {
                    let v = rows[richer][item];
                    if best_chore.is_none_or(|(_, incumbent)| v < incumbent) {
                        best_chore = Some((item, v));
                    }
                }
                ItemClass::Mixed => unreachable!("objectivity was checked"),
            }
        }

        let take_good = match (best_good, best_chore) {
            (Some((_, gv)), Some((_, cv))) => gv.unsigned_abs() > cv.unsigned_abs(),
            (Some(_), None) => true,
            (None, Some(_)) => false,
            (None, None) => unreachable!("pool is nonempty"),
        };
        if take_good {
            let (good, gv) = best_good.expect("checked above");
            // Every chore already parked with the richer agent outweighs the
            // good being placed now.
            for &c in allocation.bundle(richer) {
                if classes.items[c] == ItemClass::Chore {
                    assert!(
                        rows[richer][c].unsigned_abs() >= gv.unsigned_abs(),
                        "parked chore {c} is lighter than the incoming good {good}"
                    );
                }
            }
            allocation.assign(good, poorer);
            values[poorer] = values[poorer]
                .checked_add(gv)
                .ok_or(Error::Overflow("bundle value"))?;
        } else {
            let (chore, cv) = best_chore.expect("checked above");
            for &g in allocation.bundle(poorer) {
                if classes.items[g] == ItemClass::Good {
                    assert!(
                        rows[poorer][g].unsigned_abs() >= cv.unsigned_abs(),
                        "parked good {g} is lighter than the incoming chore {chore}"
                    );
                }
            }
            allocation.assign(chore, richer);
            values[richer] = values[richer]
                .checked_add(cv)
                .ok_or(Error::Overflow("bundle value"))?;
        }
        stats.add_steps += 1;

        let report = check_eqx(instance, &allocation)?;
        assert!(report.is_eqx, "interim allocation lost EQx in round {}", stats.outer_iterations);
    }

    stats.oracle_calls = instance.oracle_calls() - calls_before;
    Ok((allocation, stats))
}
