//! JSON document formats for instances and allocations.
//!
//! Instance files look like
//! `{"agents": n, "items": [names...], "valuations": [{"kind": "...", ...}]}`
//! and allocation files like `{"bundles": [[idx...]...], "unassigned": [idx...]}`.
//! Saving is byte-stable: the same value always serializes to the same
//! document.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::allocation::Allocation;
use crate::error::{Error, Result};
use crate::instance::{Instance, Valuation};
use crate::Value;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    agents: usize,
    items: Vec<String>,
    valuations: Vec<RawValuation>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawValuation {
    Additive {
        values: Vec<Value>,
    },
    BudgetAdditive {
        values: Vec<Value>,
        budget: Value,
    },
    PartitionMatroidRank {
        parts: Vec<Vec<usize>>,
        capacities: Vec<Value>,
    },
    ExplicitTable {
        table: BTreeMap<String, Value>,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAllocation {
    bundles: Vec<Vec<usize>>,
    unassigned: Vec<usize>,
}

fn valuation_from_raw(raw: RawValuation, m: usize) -> Result<Valuation> {
    Ok(match raw {
        RawValuation::Additive { values } => Valuation::Additive { values },
        RawValuation::BudgetAdditive { values, budget } => {
            Valuation::BudgetAdditive { values, budget }
        }
        RawValuation::PartitionMatroidRank { parts, capacities } => {
            Valuation::PartitionMatroidRank { parts, capacities }
        }
        RawValuation::ExplicitTable { table } => {
            let size = 1usize
                .checked_shl(m as u32)
                .filter(|_| m <= crate::instance::MAX_TABLE_ITEMS)
                .ok_or_else(|| {
                    Error::Parse(format!("explicit table over {m} items is too large"))
                })?;
            if table.len() != size {
                return Err(Error::Parse(format!(
                    "explicit table has {} entries, expected {size} (every subset must be present)",
                    table.len()
                )));
            }
            let mut dense = vec![0 as Value; size];
            for (key, value) in table {
                let mask: usize = key.parse().map_err(|_| {
                    Error::Parse(format!("explicit table key `{key}` is not a subset bitmask"))
                })?;
                if mask >= size {
                    return Err(Error::Parse(format!(
                        "explicit table key {mask} exceeds the ground set of {m} items"
                    )));
                }
                dense[mask] = value;
            }
            Valuation::ExplicitTable { item_count: m, table: dense }
        }
    })
}

fn valuation_to_raw(valuation: &Valuation) -> RawValuation {
    match valuation {
        Valuation::Additive { values } => RawValuation::Additive { values: values.clone() },
        Valuation::BudgetAdditive { values, budget } => RawValuation::BudgetAdditive {
            values: values.clone(),
            budget: *budget,
        },
        Valuation::PartitionMatroidRank { parts, capacities } => {
            RawValuation::PartitionMatroidRank {
                parts: parts.clone(),
                capacities: capacities.clone(),
            }
        }
        Valuation::ExplicitTable { table, .. } => RawValuation::ExplicitTable {
            table: table
                .iter()
                .enumerate()
                .map(|(mask, v)| (mask.to_string(), *v))
                .collect(),
        },
    }
}

/// Parses an instance document, validating the schema and all invariants.
pub fn load_instance(document: &str) -> Result<Instance> {
    let raw: RawInstance =
        serde_json::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
    if raw.agents == 0 {
        return Err(Error::Parse("`agents` must be at least 1".into()));
    }
    if raw.valuations.len() != raw.agents {
        return Err(Error::Parse(format!(
            "{} agents but {} valuations",
            raw.agents,
            raw.valuations.len()
        )));
    }
    let m = raw.items.len();
    let valuations = raw
        .valuations
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            valuation_from_raw(v, m)
                .map_err(|e| Error::Parse(format!("valuation of agent {i}: {}", e.detail())))
        })
        .collect::<Result<Vec<_>>>()?;
    Instance::new(raw.items, valuations)
}

/// Serializes an instance. Deterministic: equal instances produce equal
/// bytes.
pub fn save_instance(instance: &Instance) -> String {
    let raw = RawInstance {
        agents: instance.agent_count(),
        items: instance.item_names().to_vec(),
        valuations: instance.valuations().iter().map(valuation_to_raw).collect(),
    };
    let mut out = serde_json::to_string_pretty(&raw).expect("instance serialization");
    out.push('\n');
    out
}

/// Parses an allocation document and checks it partitions 0..item_count.
pub fn load_allocation(document: &str, item_count: usize) -> Result<Allocation> {
    let raw: RawAllocation =
        serde_json::from_str(document).map_err(|e| Error::Parse(e.to_string()))?;
    let mut to_set = |list: Vec<usize>| -> Result<BTreeSet<usize>> {
        let mut set = BTreeSet::new();
        for x in list {
            if !set.insert(x) {
                return Err(Error::Parse(format!("item {x} assigned twice")));
            }
        }
        Ok(set)
    };
    let bundles = raw
        .bundles
        .into_iter()
        .map(&mut to_set)
        .collect::<Result<Vec<_>>>()?;
    let unassigned = to_set(raw.unassigned)?;
    Allocation::from_parts(bundles, unassigned, item_count)
}

/// The allocation document as a JSON value, for embedding in larger
/// documents.
pub fn allocation_value(allocation: &Allocation) -> serde_json::Value {
    let raw = RawAllocation {
        bundles: allocation
            .bundles()
            .iter()
            .map(|b| b.iter().copied().collect())
            .collect(),
        unassigned: allocation.unassigned().iter().copied().collect(),
    };
    serde_json::to_value(raw).expect("allocation serialization")
}

/// Serializes an allocation; bundles and pool are emitted in ascending item
/// order.
pub fn save_allocation(allocation: &Allocation) -> String {
    let raw = RawAllocation {
        bundles: allocation
            .bundles()
            .iter()
            .map(|b| b.iter().copied().collect())
            .collect(),
        unassigned: allocation.unassigned().iter().copied().collect(),
    };
    let mut out = serde_json::to_string_pretty(&raw).expect("allocation serialization");
    out.push('\n');
    out
}
