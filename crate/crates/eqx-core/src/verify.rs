//! Definitional checkers for equitable, EQx, (1∓ε)-EQx, and EFx allocations.
//!
//! All checkers are pure functions over immutable inputs. They evaluate
//! valuations directly (without touching the instance's oracle-call counter)
//! so that solvers can assert invariants mid-run without distorting their
//! own oracle statistics.

use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::epsilon::Epsilon;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::{Direction, Value};

/// One failed goods condition: removing `good` from `owner`'s bundle leaves
/// it strictly above the witness, i.e. lhs > rhs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoodsViolation {
    pub owner: usize,
    pub good: usize,
    pub witness: usize,
    pub lhs: Value,
    pub rhs: Value,
}

/// One failed chores condition: removing `chore` from `owner`'s bundle still
/// leaves it strictly below the witness, i.e. lhs < rhs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoresViolation {
    pub owner: usize,
    pub chore: usize,
    pub witness: usize,
    pub lhs: Value,
    pub rhs: Value,
}

/// Complete list of violations found by a checker.
///
/// One entry is recorded per violating (owner, item) pair, carrying the
/// extremal witness: the poorest other agent for goods violations and the
/// richest other agent for chores violations, ties to the lowest index.
/// `is_eqx` is true iff both lists are empty (for [`check_efx`] it reports
/// the EFx verdict in the same field).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub goods_violations: Vec<GoodsViolation>,
    pub chores_violations: Vec<ChoresViolation>,
    pub is_eqx: bool,
}

impl ViolationReport {
    fn from_lists(goods: Vec<GoodsViolation>, chores: Vec<ChoresViolation>) -> Self {
        let is_eqx = goods.is_empty() && chores.is_empty();
        Self {
            goods_violations: goods,
            chores_violations: chores,
            is_eqx,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

fn bundle_values(instance: &Instance, allocation: &Allocation) -> Result<Vec<Value>> {
    (0..allocation.agent_count())
        .map(|i| instance.valuation(i).eval(allocation.bundle(i)))
        .collect()
}

/// Poorest agent other than `owner` by (value, index), or None when there is
/// no other agent.
fn poorest_excluding(values: &[Value], owner: usize) -> Option<(usize, Value)> {
    values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != owner)
        .map(|(i, v)| (i, *v))
        .min_by_key(|(i, v)| (*v, *i))
}

fn richest_excluding(values: &[Value], owner: usize) -> Option<(usize, Value)> {
    values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != owner)
        .map(|(i, v)| (i, *v))
        .max_by_key(|(i, v)| (*v, std::cmp::Reverse(*i)))
}

/// Checks the allocation for EQx: removing any good from a bundle must make
/// its owner a poorest agent, and removing any chore must make its owner a
/// richest agent.
///
/// Whether an item counts as a good or a chore is decided by the sign of its
/// marginal within the owner's bundle (zero marginals count as goods), so
/// mixed instances are handled per owner. Partial allocations are checked
/// over the assigned items only.
pub fn check_eqx(instance: &Instance, allocation: &Allocation) -> Result<ViolationReport> {
    check_eqx_inner(instance, allocation, Epsilon::zero(), None)
}

/// Checks the approximate notion: for goods, (1−ε)·v_j(A_j∖g) ≤ v_i(A_i) for
/// every pair and good; for chores, v_i(A_i∖c) ≥ (1+ε)·v_j(A_j). Requires a
/// monotone instance consistent with `direction`; ε = 0 coincides with
/// [`check_eqx`].
pub fn check_eps_eqx(
    instance: &Instance,
    allocation: &Allocation,
    epsilon: Epsilon,
    direction: Direction,
) -> Result<ViolationReport> {
    if !instance.monotone_in(direction)? {
        return Err(Error::Precondition(format!(
            "instance is not monotone in the {direction:?} direction"
        )));
    }
    check_eqx_inner(instance, allocation, epsilon, Some(direction))
}

/// Same as [`check_eps_eqx`] with item roles forced by `direction` and
/// without re-verifying monotonicity; used by solvers to assert invariants
/// on interim allocations without rescanning the valuations every iteration.
pub(crate) fn check_eps_eqx_unchecked(
    instance: &Instance,
    allocation: &Allocation,
    epsilon: Epsilon,
    direction: Direction,
) -> Result<ViolationReport> {
    check_eqx_inner(instance, allocation, epsilon, Some(direction))
}

fn check_eqx_inner(
    instance: &Instance,
    allocation: &Allocation,
    epsilon: Epsilon,
    direction: Option<Direction>,
) -> Result<ViolationReport> {
    let values = bundle_values(instance, allocation)?;
    let mut goods = Vec::new();
    let mut chores = Vec::new();
    for owner in 0..allocation.agent_count() {
        let bundle = allocation.bundle(owner);
        for &item in bundle {
            let removed = instance.valuation(owner).eval_without(bundle, Some(item))?;
            let is_good = match direction {
                Some(Direction::Goods) => true,
                Some(Direction::Chores) => false,
                None => removed <= values[owner],
            };
            if is_good {
                if let Some((witness, rhs)) = poorest_excluding(&values, owner) {
                    if !epsilon.goods_ok(removed, rhs) {
                        goods.push(GoodsViolation {
                            owner,
                            good: item,
                            witness,
                            lhs: removed,
                            rhs,
                        });
                    }
                }
            } else if let Some((witness, rhs)) = richest_excluding(&values, owner) {
                if !epsilon.chores_ok(removed, rhs) {
                    chores.push(ChoresViolation {
                        owner,
                        chore: item,
                        witness,
                        lhs: removed,
                        rhs,
                    });
                }
            }
        }
    }
    Ok(ViolationReport::from_lists(goods, chores))
}

/// True iff all agents value their own bundles equally.
pub fn check_equitable(instance: &Instance, allocation: &Allocation) -> Result<bool> {
    let values = bundle_values(instance, allocation)?;
    Ok(values.windows(2).all(|w| w[0] == w[1]))
}

/// Checks the allocation for EFx: from each agent i's perspective, removing
/// any good from another bundle makes that bundle worth at most i's own, and
/// removing any chore from i's own bundle lifts it to at least any other
/// bundle's worth.
///
/// Entries reuse the [`ViolationReport`] shape: for goods, `owner` holds the
/// envied bundle and `witness` is the envious evaluator (lhs = v_i(A_j∖g),
/// rhs = v_i(A_i)); for chores, `owner` holds the chore and `witness` is the
/// envied agent (lhs = v_i(A_i∖c), rhs = v_i(A_j)). As with EQx, one entry is
/// recorded per violating (bundle, item), keeping the extremal witness.
pub fn check_efx(instance: &Instance, allocation: &Allocation) -> Result<ViolationReport> {
    let n = allocation.agent_count();
    let mut own = Vec::with_capacity(n);
    for i in 0..n {
        own.push(instance.valuation(i).eval(allocation.bundle(i))?);
    }
    let mut goods = Vec::new();
    let mut chores = Vec::new();
    for owner in 0..n {
        let bundle = allocation.bundle(owner);
        for &item in bundle {
            let own_removed = instance.valuation(owner).eval_without(bundle, Some(item))?;
            let good_for_owner = own_removed <= own[owner];

            // Goods side: evaluators i ≠ owner for whom the item is a good
            // within the owner's bundle and envy persists after removal.
            let mut good_hit: Option<(usize, Value, Value)> = None;
            // Chores side: the worst other bundle per the owner's valuation.
            let mut chore_hit: Option<(usize, Value)> = None;
            for (other, &other_own) in own.iter().enumerate() {
                if other == owner {
                    continue;
                }
                let outside = instance.valuation(other).eval_without(bundle, Some(item))?;
                let full = instance.valuation(other).eval(bundle)?;
                if outside <= full && outside > other_own {
                    let better = match good_hit {
                        None => true,
                        Some((_, _, best_rhs)) => other_own < best_rhs,
                    };
                    if better {
                        good_hit = Some((other, outside, other_own));
                    }
                }
                if !good_for_owner {
                    let envied = instance.valuation(owner).eval(allocation.bundle(other))?;
                    if own_removed < envied {
                        let better = match chore_hit {
                            None => true,
                            Some((_, best_rhs)) => envied > best_rhs,
                        };
                        if better {
                            chore_hit = Some((other, envied));
                        }
                    }
                }
            }
            if let Some((witness, lhs, rhs)) = good_hit {
                goods.push(GoodsViolation {
                    owner,
                    good: item,
                    witness,
                    lhs,
                    rhs,
                });
            }
            if let Some((witness, rhs)) = chore_hit {
                chores.push(ChoresViolation {
                    owner,
                    chore: item,
                    witness,
                    lhs: own_removed,
                    rhs,
                });
            }
        }
    }
    Ok(ViolationReport::from_lists(goods, chores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::Allocation;
    use crate::gen;
    use std::collections::BTreeSet;

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    fn alloc(bundles: &[&[usize]], m: usize) -> Allocation {
        Allocation::complete_from_bundles(bundles.iter().map(|b| set(b)).collect(), m).unwrap()
    }

    #[test]
    fn table4_greedy_allocation_has_the_chores_violation() {
        let inst = gen::canonical("table4").unwrap();
        let a = alloc(&[&[0, 2], &[1]], 3);
        let report = check_eqx(&inst, &a).unwrap();
        assert!(!report.is_eqx);
        assert!(report.goods_violations.is_empty());
        assert_eq!(
            report.chores_violations,
            vec![ChoresViolation { owner: 0, chore: 2, witness: 1, lhs: 10, rhs: 100 }]
        );
    }

    #[test]
    fn table4_swapped_allocation_is_eqx() {
        let inst = gen::canonical("table4").unwrap();
        let a = alloc(&[&[1, 2], &[0]], 3);
        assert!(check_eqx(&inst, &a).unwrap().is_eqx);
    }

    #[test]
    fn single_agent_is_vacuously_eqx() {
        let inst = Instance::additive(&[vec![5, -3, 2]]).unwrap();
        let a = alloc(&[&[0, 1, 2]], 3);
        assert!(check_eqx(&inst, &a).unwrap().is_eqx);
    }

    #[test]
    fn table2_two_goods_to_one_agent_violates() {
        let inst = gen::canonical("table2").unwrap();
        let a = alloc(&[&[0, 2], &[1]], 3);
        let report = check_eqx(&inst, &a).unwrap();
        assert_eq!(
            report.goods_violations,
            vec![GoodsViolation { owner: 0, good: 0, witness: 1, lhs: 100, rhs: 1 }]
        );
        assert!(report.chores_violations.is_empty());
    }

    #[test]
    fn eps_zero_matches_exact_checker() {
        let inst = Instance::additive(&[vec![4, 2, 1], vec![3, 3, 1]]).unwrap();
        let a = alloc(&[&[0], &[1, 2]], 3);
        let exact = check_eqx(&inst, &a).unwrap();
        let eps = check_eps_eqx(&inst, &a, Epsilon::zero(), Direction::Goods).unwrap();
        assert_eq!(exact, eps);
    }

    #[test]
    fn eps_goods_violation_by_cross_multiplication() {
        // Goods [10, 9] both to agent 0: removing 9 leaves 10, and
        // 9·10 = 90 > 10·0 = 0.
        let inst = Instance::additive(&[vec![10, 9], vec![10, 9]]).unwrap();
        let a = alloc(&[&[0, 1], &[]], 2);
        let report =
            check_eps_eqx(&inst, &a, Epsilon::new(1, 10).unwrap(), Direction::Goods).unwrap();
        assert!(!report.is_eqx);
        assert!(report
            .goods_violations
            .iter()
            .any(|v| v.owner == 0 && v.good == 1 && v.lhs == 10 && v.rhs == 0));
    }

    #[test]
    fn table4_goods_only_split_is_eps_eqx() {
        // Goods g1, g2 of the two-good instance split one apiece: every
        // removal empties a bundle, so (1−ε)·0 ≤ anything holds.
        let inst = Instance::additive(&[vec![10, 1], vec![1, 100]]).unwrap();
        let a = alloc(&[&[0], &[1]], 2);
        let report =
            check_eps_eqx(&inst, &a, Epsilon::new(1, 10).unwrap(), Direction::Goods).unwrap();
        assert!(report.is_eqx);
    }

    #[test]
    fn eps_checker_rejects_inconsistent_direction() {
        let inst = gen::canonical("table2").unwrap();
        let a = alloc(&[&[0, 1, 2], &[]], 3);
        let err = check_eps_eqx(&inst, &a, Epsilon::zero(), Direction::Goods).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn empty_bundles_are_equitable_and_efx() {
        let inst = Instance::additive(&[vec![], vec![]]).unwrap();
        let a = alloc(&[&[], &[]], 0);
        assert!(check_equitable(&inst, &a).unwrap());
        assert!(check_efx(&inst, &a).unwrap().is_eqx);
    }

    #[test]
    fn identical_valuations_make_efx_and_eqx_reports_agree() {
        let rows = vec![vec![4, -2, 3, 1], vec![4, -2, 3, 1], vec![4, -2, 3, 1]];
        let inst = Instance::additive(&rows).unwrap();
        for (b0, b1) in [(vec![0, 1], vec![2]), (vec![0], vec![1, 2, 3]), (vec![], vec![0, 2])] {
            let rest: Vec<usize> = (0..4).filter(|x| !b0.contains(x) && !b1.contains(x)).collect();
            let a = alloc(&[&b0, &b1, &rest], 4);
            let eqx = check_eqx(&inst, &a).unwrap();
            let efx = check_efx(&inst, &a).unwrap();
            assert_eq!(eqx, efx, "bundles {b0:?} {b1:?} {rest:?}");
        }
    }

    #[test]
    fn monotone_goods_instances_never_produce_chores_violations() {
        for seed in 0..50 {
            let inst = gen::gen_random(
                &gen::GenParams {
                    agents: 3,
                    items: 5,
                    value_lo: 0,
                    value_hi: 9,
                    class: gen::InstanceClass::MonotoneGoods,
                    kind: gen::ValuationKind::Additive,
                },
                seed,
            )
            .unwrap();
            let a = alloc(&[&[0, 1, 2, 3, 4], &[], &[]], 5);
            let report = check_eqx(&inst, &a).unwrap();
            assert!(report.chores_violations.is_empty());
        }
    }

    /// Naive reference checker: quantify over every ordered pair and item,
    /// straight from the definition, collapsing witnesses extremally.
    fn naive_eqx(instance: &Instance, allocation: &Allocation) -> ViolationReport {
        let n = allocation.agent_count();
        let values: Vec<Value> = (0..n)
            .map(|i| instance.valuation(i).eval(allocation.bundle(i)).unwrap())
            .collect();
        let mut goods = Vec::new();
        let mut chores = Vec::new();
        for owner in 0..n {
            for &item in allocation.bundle(owner) {
                let removed = instance
                    .valuation(owner)
                    .eval_without(allocation.bundle(owner), Some(item))
                    .unwrap();
                if removed <= values[owner] {
                    let mut hits: Vec<usize> =
                        (0..n).filter(|&i| i != owner && removed > values[i]).collect();
                    hits.sort_by_key(|&i| (values[i], i));
                    if let Some(&witness) = hits.first() {
                        goods.push(GoodsViolation {
                            owner,
                            good: item,
                            witness,
                            lhs: removed,
                            rhs: values[witness],
                        });
                    }
                } else {
                    let mut hits: Vec<usize> =
                        (0..n).filter(|&j| j != owner && removed < values[j]).collect();
                    hits.sort_by_key(|&j| (std::cmp::Reverse(values[j]), j));
                    if let Some(&witness) = hits.first() {
                        chores.push(ChoresViolation {
                            owner,
                            chore: item,
                            witness,
                            lhs: removed,
                            rhs: values[witness],
                        });
                    }
                }
            }
        }
        ViolationReport::from_lists(goods, chores)
    }

    #[test]
    fn checker_agrees_with_naive_reference_on_random_instances() {
        let mut rng = gen::SplitMix64::new(0xE0_2024);
        for round in 0..10_000 {
            let n = 2 + (rng.next_below(3) as usize);
            let m = 1 + (rng.next_below(7) as usize);
            let inst = gen::gen_random(
                &gen::GenParams {
                    agents: n,
                    items: m,
                    value_lo: 0,
                    value_hi: 6,
                    class: gen::InstanceClass::Subjective,
                    kind: gen::ValuationKind::Additive,
                },
                rng.next_u64(),
            )
            .unwrap();
            let mut a = Allocation::empty(n, m);
            for item in 0..m {
                a.assign(item, rng.next_below(n as u64) as usize);
            }
            let fast = check_eqx(&inst, &a).unwrap();
            let naive = naive_eqx(&inst, &a);
            assert_eq!(fast, naive, "round {round}");
        }
    }
}
