//! The σ agent ordering, the ≺++ comparison operator, and leximin++
//! maximization by exhaustive enumeration.

use std::cmp::Ordering;

use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::oracle::{allocation_count, enumerate_allocations};

/// Which bundle values come first in the σ ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaDirection {
    /// Ascending own value: poorest agents first. The ordering used when
    /// chores are identically valued.
    ChoresIdentical,
    /// Ascending negated value: richest agents first. The mirror used when
    /// goods are identically valued.
    GoodsIdentical,
}

/// Sort key of one agent: (signed value, bundle size, agent index), all
/// ascending. Values are widened so negation cannot overflow.
type SigmaKey = (i128, usize, usize);

fn keys(
    instance: &Instance,
    allocation: &Allocation,
    direction: SigmaDirection,
) -> Result<Vec<SigmaKey>> {
    (0..allocation.agent_count())
        .map(|i| {
            let value = instance.valuation(i).eval(allocation.bundle(i))? as i128;
            let keyed = match direction {
                SigmaDirection::ChoresIdentical => value,
                SigmaDirection::GoodsIdentical => -value,
            };
            Ok((keyed, allocation.bundle(i).len(), i))
        })
        .collect()
}

/// The permutation σ: agents sorted by (value, bundle size, index). Entry ℓ
/// holds the agent at position ℓ, 0-based.
pub fn sigma_permutation(
    instance: &Instance,
    allocation: &Allocation,
    direction: SigmaDirection,
) -> Result<Vec<usize>> {
    let mut keys = keys(instance, allocation, direction)?;
    keys.sort_unstable();
    Ok(keys.into_iter().map(|(_, _, i)| i).collect())
}

/// The ≺++ comparison: walks both σ orderings position by position and
/// decides at the first differing key. `Less` means a ≺++ b; `Equal` means
/// the two key sequences are identical.
pub fn precplus(
    instance: &Instance,
    a: &Allocation,
    b: &Allocation,
    direction: SigmaDirection,
) -> Result<Ordering> {
    let mut ka = keys(instance, a, direction)?;
    let mut kb = keys(instance, b, direction)?;
    ka.sort_unstable();
    kb.sort_unstable();
    Ok(ka.cmp(&kb))
}

/// The ≺++-maximum complete allocation, found by exhaustive enumeration.
/// With ties under ≺++ (identical key sequences) the enumeration-first
/// allocation is returned. `budget` caps the n^m search space.
pub fn leximin_pp(
    instance: &Instance,
    direction: SigmaDirection,
    budget: u64,
) -> Result<Allocation> {
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
    let mut best: Option<(Vec<SigmaKey>, Allocation)> = None;
    for candidate in enumerate_allocations(n, m) {
        let mut k = keys(instance, &candidate, direction)?;
        k.sort_unstable();
        let replace = match &best {
            None => true,
            Some((best_keys, _)) => k > *best_keys,
        };
        if replace {
            best = Some((k, candidate));
        }
    }
    Ok(best.expect("enumeration is nonempty").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::verify::check_eqx;
    use std::collections::BTreeSet;

    fn alloc(bundles: &[&[usize]], m: usize) -> Allocation {
        Allocation::complete_from_bundles(
            bundles.iter().map(|b| b.iter().copied().collect::<BTreeSet<_>>()).collect(),
            m,
        )
        .unwrap()
    }

    #[test]
    fn equal_allocations_compare_equal() {
        let inst = gen::canonical("table4").unwrap();
        let a = alloc(&[&[0, 2], &[1]], 3);
        assert_eq!(
            precplus(&inst, &a, &a.clone(), SigmaDirection::ChoresIdentical).unwrap(),
            Ordering::Equal
        );
    }

    #[test]
    fn table4_chore_dump_is_smaller() {
        let inst = gen::canonical("table4").unwrap();
        // Values (9, 100) against (10, −900): the minimum decides.
        let a = alloc(&[&[0, 2], &[1]], 3);
        let b = alloc(&[&[0], &[1, 2]], 3);
        assert_eq!(
            precplus(&inst, &b, &a, SigmaDirection::ChoresIdentical).unwrap(),
            Ordering::Less
        );
        assert_eq!(
            precplus(&inst, &a, &b, SigmaDirection::ChoresIdentical).unwrap(),
            Ordering::Greater
        );
    }

    #[test]
    fn table4_leximin_is_the_documented_allocation() {
        let inst = gen::canonical("table4").unwrap();
        let best = leximin_pp(&inst, SigmaDirection::ChoresIdentical, 1 << 20).unwrap();
        assert_eq!(best, alloc(&[&[0, 2], &[1]], 3));
        let report = check_eqx(&inst, &best).unwrap();
        assert!(!report.is_eqx, "the leximin++ allocation fails EQx here");
    }

    #[test]
    fn single_item_result_is_precplus_maximal() {
        let inst = Instance::additive(&[vec![5], vec![7]]).unwrap();
        let best = leximin_pp(&inst, SigmaDirection::ChoresIdentical, 1 << 20).unwrap();
        for other in enumerate_allocations(2, 1) {
            let cmp = precplus(&inst, &other, &best, SigmaDirection::ChoresIdentical).unwrap();
            assert_ne!(cmp, Ordering::Greater);
        }
    }

    #[test]
    fn identical_chores_leximin_is_eqx() {
        for seed in 0..60 {
            let mut rng = gen::SplitMix64::new(seed);
            let n = 2 + rng.next_below(2) as usize;
            let m = 1 + rng.next_below(5) as usize;
            let inst = identical_chores_instance(&mut rng, n, m);
            let best = leximin_pp(&inst, SigmaDirection::ChoresIdentical, 1 << 24).unwrap();
            assert!(check_eqx(&inst, &best).unwrap().is_eqx, "seed {seed}");
        }
    }

    /// Objective additive instance whose chores are identically valued;
    /// goods may differ per agent.
    fn identical_chores_instance(rng: &mut gen::SplitMix64, n: usize, m: usize) -> Instance {
        let chore_flags: Vec<bool> = (0..m).map(|_| rng.next_below(2) == 1).collect();
        let common: Vec<i64> = (0..m).map(|_| -rng.next_in(1, 9)).collect();
        let rows: Vec<Vec<i64>> = (0..n)
            .map(|_| {
                (0..m)
                    .map(|x| if chore_flags[x] { common[x] } else { rng.next_in(0, 9) })
                    .collect()
            })
            .collect();
        Instance::additive(&rows).unwrap()
    }

    #[test]
    fn identical_goods_leximin_is_eqx_under_the_mirrored_order() {
        for seed in 0..60 {
            let mut rng = gen::SplitMix64::new(0x600D + seed);
            let n = 2 + rng.next_below(2) as usize;
            let m = 1 + rng.next_below(5) as usize;
            let good_flags: Vec<bool> = (0..m).map(|_| rng.next_below(2) == 1).collect();
            let common: Vec<i64> = (0..m).map(|_| rng.next_in(1, 9)).collect();
            let rows: Vec<Vec<i64>> = (0..n)
                .map(|_| {
                    (0..m)
                        .map(|x| if good_flags[x] { common[x] } else { -rng.next_in(1, 9) })
                        .collect()
                })
                .collect();
            let inst = Instance::additive(&rows).unwrap();
            let best = leximin_pp(&inst, SigmaDirection::GoodsIdentical, 1 << 24).unwrap();
            assert!(check_eqx(&inst, &best).unwrap().is_eqx, "seed {seed}");
        }
    }

    #[test]
    fn order_axioms_on_exhaustive_small_instances() {
        let mut rng = gen::SplitMix64::new(0xA11C);
        for _ in 0..10 {
            let n = 2 + rng.next_below(2) as usize;
            let m = 1 + rng.next_below(4) as usize;
            let inst = gen::gen_random(
                &gen::GenParams {
                    agents: n,
                    items: m,
                    value_lo: 0,
                    value_hi: 4,
                    class: gen::InstanceClass::Subjective,
                    kind: gen::ValuationKind::Additive,
                },
                rng.next_u64(),
            )
            .unwrap();
            let all: Vec<Allocation> = enumerate_allocations(n, m).collect();
            for a in &all {
                assert_eq!(
                    precplus(&inst, a, a, SigmaDirection::ChoresIdentical).unwrap(),
                    Ordering::Equal
                );
            }
            for a in &all {
                for b in &all {
                    let ab = precplus(&inst, a, b, SigmaDirection::ChoresIdentical).unwrap();
                    let ba = precplus(&inst, b, a, SigmaDirection::ChoresIdentical).unwrap();
                    assert_eq!(ab, ba.reverse());
                }
            }
        }
    }
}
