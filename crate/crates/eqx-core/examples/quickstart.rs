//! Generate a random monotone instance, solve it, and verify the result.

use eqx_core::{gen, monotone, verify, Direction, Error};

fn main() -> Result<(), Error> {
    let instance = gen::gen_random(
        &gen::GenParams {
            agents: 3,
            items: 8,
            value_lo: 0,
            value_hi: 20,
            class: gen::InstanceClass::MonotoneGoods,
            kind: gen::ValuationKind::BudgetAdditive,
        },
        42,
    )?;
    let (allocation, stats) = monotone::add_and_fix(&instance, Direction::Goods)?;
    assert!(verify::check_eqx(&instance, &allocation)?.is_eqx);
    assert_eq!(stats.fix_steps, 0); // budget-additive valuations never need fixing

    for (agent, bundle) in allocation.bundles().iter().enumerate() {
        let value = instance.valuation(agent).eval(bundle)?;
        println!("agent {agent}: items {bundle:?}, value {value}");
    }
    Ok(())
}
