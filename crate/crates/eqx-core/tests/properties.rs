//! Property tests over randomly structured inputs.

use std::collections::BTreeSet;

use proptest::prelude::*;

use eqx_core::gen::{self, GenParams, InstanceClass, ValuationKind};
use eqx_core::io::{load_allocation, load_instance, save_allocation, save_instance};
use eqx_core::verify::{check_eps_eqx, check_eqx};
use eqx_core::{Allocation, Direction, Epsilon, Instance, Valuation, Value};

fn additive(m: usize) -> impl Strategy<Value = Valuation> {
    proptest::collection::vec(-50 as Value..=50, m)
        .prop_map(|values| Valuation::Additive { values })
}

fn budget_additive(m: usize) -> impl Strategy<Value = Valuation> {
    (proptest::collection::vec(0 as Value..=20, m), 0 as Value..=60)
        .prop_map(|(values, budget)| Valuation::BudgetAdditive { values, budget })
}

fn matroid_rank(m: usize) -> impl Strategy<Value = Valuation> {
    // A part id per item, compacted into the final parts list.
    (proptest::collection::vec(0usize..m.max(1), m), 1 as Value..=3).prop_map(
        move |(part_ids, cap)| {
            let mut parts: Vec<Vec<usize>> = vec![Vec::new(); m.max(1)];
            for (item, &p) in part_ids.iter().enumerate() {
                parts[p].push(item);
            }
            parts.retain(|p| !p.is_empty());
            let capacities = parts.iter().map(|p| cap.min(p.len() as Value)).collect();
            Valuation::PartitionMatroidRank { parts, capacities }
        },
    )
}

fn table(m: usize) -> impl Strategy<Value = Valuation> {
    proptest::collection::vec(-20 as Value..=20, 1 << m).prop_map(move |mut values| {
        values[0] = 0;
        Valuation::ExplicitTable { item_count: m, table: values }
    })
}

fn valuation(m: usize) -> impl Strategy<Value = Valuation> {
    prop_oneof![additive(m), budget_additive(m), matroid_rank(m), table(m)]
}

fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=3, 0usize..=5).prop_flat_map(|(n, m)| {
        proptest::collection::vec(valuation(m), n)
            .prop_map(move |vs| Instance::with_default_names(m, vs).expect("valid instance"))
    })
}

fn complete_allocation(n: usize, m: usize) -> impl Strategy<Value = Allocation> {
    proptest::collection::vec(0usize..n, m).prop_map(move |owners| {
        let mut bundles = vec![BTreeSet::new(); n];
        for (item, &owner) in owners.iter().enumerate() {
            bundles[owner].insert(item);
        }
        Allocation::complete_from_bundles(bundles, m).expect("partition")
    })
}

proptest! {
    #[test]
    fn instance_documents_round_trip(inst in instance()) {
        let doc = save_instance(&inst);
        let back = load_instance(&doc).unwrap();
        prop_assert_eq!(&inst, &back);
        prop_assert_eq!(doc, save_instance(&back));
    }

    #[test]
    fn allocation_documents_round_trip(
        (n, m, allocation) in (1usize..=4, 0usize..=8)
            .prop_flat_map(|(n, m)| (Just(n), Just(m), complete_allocation(n, m)))
    ) {
        let _ = n;
        let doc = save_allocation(&allocation);
        prop_assert_eq!(load_allocation(&doc, m).unwrap(), allocation);
    }

    #[test]
    fn monotone_kinds_never_decrease(
        v in prop_oneof![budget_additive(5), matroid_rank(5)],
    ) {
        for mask in 0usize..32 {
            let set: BTreeSet<usize> = (0..5).filter(|x| mask & (1 << x) != 0).collect();
            let base = v.eval(&set).unwrap();
            for x in 0..5 {
                if mask & (1 << x) == 0 {
                    let mut grown = set.clone();
                    grown.insert(x);
                    prop_assert!(v.eval(&grown).unwrap() >= base);
                }
            }
        }
    }

    #[test]
    fn epsilon_comparisons_match_wide_arithmetic(
        num in 0u64..1_000_000_000,
        den in 1u64..1_000_000_000,
        lhs in proptest::num::i64::ANY,
        rhs in proptest::num::i64::ANY,
    ) {
        prop_assume!(num < den);
        let e = Epsilon::new(num, den).unwrap();
        let (num, den) = (num as i128, den as i128);
        let goods = (den - num).checked_mul(lhs as i128).unwrap()
            <= den.checked_mul(rhs as i128).unwrap();
        prop_assert_eq!(e.goods_ok(lhs, rhs), goods);
        let chores = den.checked_mul(lhs as i128).unwrap()
            >= (den + num).checked_mul(rhs as i128).unwrap();
        prop_assert_eq!(e.chores_ok(lhs, rhs), chores);
    }

    #[test]
    fn zero_epsilon_check_equals_exact_check(seed in proptest::num::u64::ANY, m in 0usize..7) {
        let inst = gen::gen_random(
            &GenParams {
                agents: 3,
                items: m,
                value_lo: 0,
                value_hi: 9,
                class: InstanceClass::MonotoneGoods,
                kind: ValuationKind::Additive,
            },
            seed,
        )
        .unwrap();
        let mut rng = gen::SplitMix64::new(seed ^ 0xFEED);
        let mut allocation = Allocation::empty(3, m);
        for item in 0..m {
            allocation.assign(item, rng.next_below(3) as usize);
        }
        let exact = check_eqx(&inst, &allocation).unwrap();
        let relaxed =
            check_eps_eqx(&inst, &allocation, Epsilon::zero(), Direction::Goods).unwrap();
        prop_assert_eq!(exact, relaxed);
    }
}
