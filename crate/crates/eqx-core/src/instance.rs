//! Fair-division instances: agents, items, and per-agent valuation oracles.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::Value;

/// A set-function oracle mapping item subsets to integer values.
///
/// Every kind satisfies v(∅) = 0. `budget_additive` and
/// `partition_matroid_rank` are monotone nondecreasing by construction;
/// `additive` and `explicit_table` may take either sign.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Valuation {
    /// v(S) = Σ_{x ∈ S} values[x].
    Additive { values: Vec<Value> },
    /// v(S) = min(budget, Σ_{x ∈ S} values[x]) with nonnegative values.
    BudgetAdditive { values: Vec<Value>, budget: Value },
    /// v(S) = Σ_parts min(|S ∩ part|, capacity). Parts partition the items.
    PartitionMatroidRank {
        parts: Vec<Vec<usize>>,
        capacities: Vec<Value>,
    },
    /// Full table over a ground set of at most 20 items, indexed by bitmask.
    ExplicitTable { item_count: usize, table: Vec<Value> },
}

/// Ground sets for explicit tables are capped so a table stays 2^20 entries.
pub const MAX_TABLE_ITEMS: usize = 20;

impl Valuation {
    /// Checks that the valuation is well-formed over exactly `m` items.
    pub fn validate(&self, m: usize) -> Result<()> {
        match self {
            Valuation::Additive { values } => {
                if values.len() != m {
                    return Err(Error::Parse(format!(
                        "additive valuation has {} values, expected {m}",
                        values.len()
                    )));
                }
            }
            Valuation::BudgetAdditive { values, budget } => {
                if values.len() != m {
                    return Err(Error::Parse(format!(
                        "budget-additive valuation has {} values, expected {m}",
                        values.len()
                    )));
                }
                if let Some(v) = values.iter().find(|v| **v < 0) {
                    return Err(Error::Parse(format!(
                        "budget-additive values must be nonnegative, found {v}"
                    )));
                }
                if *budget < 0 {
                    return Err(Error::Parse(format!("budget must be nonnegative, found {budget}")));
                }
            }
            Valuation::PartitionMatroidRank { parts, capacities } => {
                if parts.len() != capacities.len() {
                    return Err(Error::Parse(format!(
                        "{} parts but {} capacities",
                        parts.len(),
                        capacities.len()
                    )));
                }
                if let Some(c) = capacities.iter().find(|c| **c < 0) {
                    return Err(Error::Parse(format!(
                        "part capacities must be nonnegative, found {c}"
                    )));
                }
                let mut seen = vec![false; m];
                for part in parts {
                    for &x in part {
                        if x >= m {
                            return Err(Error::Parse(format!(
                                "part item index {x} out of range for {m} items"
                            )));
                        }
                        if seen[x] {
                            return Err(Error::Parse(format!("item {x} appears in two parts")));
                        }
                        seen[x] = true;
                    }
                }
                if let Some(x) = seen.iter().position(|s| !s) {
                    return Err(Error::Parse(format!("item {x} missing from the part structure")));
                }
            }
            Valuation::ExplicitTable { item_count, table } => {
                if *item_count != m {
                    return Err(Error::Parse(format!(
                        "explicit table covers {item_count} items, expected {m}"
                    )));
                }
                if m > MAX_TABLE_ITEMS {
                    return Err(Error::Parse(format!(
                        "explicit table ground set capped at {MAX_TABLE_ITEMS} items, got {m}"
                    )));
                }
                if table.len() != 1usize << m {
                    return Err(Error::Parse(format!(
                        "explicit table has {} entries, expected {}",
                        table.len(),
                        1usize << m
                    )));
                }
                if table[0] != 0 {
                    return Err(Error::Parse(format!(
                        "explicit table must map the empty set to 0, found {}",
                        table[0]
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_indices<'a>(&self, subset: impl Iterator<Item = &'a usize>, m: usize) -> Result<()> {
        for &x in subset {
            if x >= m {
                return Err(Error::InvalidInput(format!(
                    "item index {x} out of range for {m} items"
                )));
            }
        }
        Ok(())
    }

    fn item_count(&self) -> usize {
        match self {
            Valuation::Additive { values } => values.len(),
            Valuation::BudgetAdditive { values, .. } => values.len(),
            Valuation::PartitionMatroidRank { parts, .. } => {
                parts.iter().map(|p| p.len()).sum()
            }
            Valuation::ExplicitTable { item_count, .. } => *item_count,
        }
    }

    /// Evaluates the oracle on `subset`, skipping `excluded` if present.
    ///
    /// Pure and unmetered; callers that owe an oracle call go through
    /// [`Instance::value`].
    pub fn eval_without(&self, subset: &BTreeSet<usize>, excluded: Option<usize>) -> Result<Value> {
        let m = self.item_count();
        self.check_indices(subset.iter(), m)?;
        let members = subset.iter().copied().filter(|&x| Some(x) != excluded);
        match self {
            Valuation::Additive { values } => {
                let mut total: Value = 0;
                for x in members {
                    total = total
                        .checked_add(values[x])
                        .ok_or(Error::Overflow("additive valuation sum"))?;
                }
                Ok(total)
            }
            Valuation::BudgetAdditive { values, budget } => {
                let mut total: Value = 0;
                for x in members {
                    total = total
                        .checked_add(values[x])
                        .ok_or(Error::Overflow("budget-additive valuation sum"))?;
                }
                Ok(total.min(*budget))
            }
            Valuation::PartitionMatroidRank { parts, capacities } => {
                let set: BTreeSet<usize> = members.collect();
                let mut total: Value = 0;
                for (part, &cap) in parts.iter().zip(capacities) {
                    let hits = part.iter().filter(|x| set.contains(x)).count() as Value;
                    total = total
                        .checked_add(hits.min(cap))
                        .ok_or(Error::Overflow("partition matroid rank sum"))?;
                }
                Ok(total)
            }
            Valuation::ExplicitTable { table, .. } => {
                let mut mask = 0usize;
                for x in members {
                    mask |= 1 << x;
                }
                Ok(table[mask])
            }
        }
    }

    pub fn eval(&self, subset: &BTreeSet<usize>) -> Result<Value> {
        self.eval_without(subset, None)
    }
}

/// Per-item classification across all agents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ItemClass {
    Good,
    Chore,
    Mixed,
}

/// Result of [`Instance::classify_items`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub items: Vec<ItemClass>,
    /// True when no item is mixed, i.e. every item is unanimously a good or
    /// a chore.
    pub objective: bool,
}

impl Classification {
    pub fn goods(&self) -> impl Iterator<Item = usize> + '_ {
        self.items
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == ItemClass::Good)
            .map(|(x, _)| x)
    }

    pub fn chores(&self) -> impl Iterator<Item = usize> + '_ {
        self.items
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == ItemClass::Chore)
            .map(|(x, _)| x)
    }
}

/// Sign pattern of one item's marginals under one agent's valuation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Polarity {
    Zero,
    Nonneg,
    Nonpos,
    Mixed,
}

/// A fair-division instance: n agents, m ordered items, one valuation per
/// agent.
///
/// Immutable after construction apart from the oracle-call counter, which is
/// atomic and therefore safe to bump from concurrent solves.
#[derive(Debug)]
pub struct Instance {
    item_names: Vec<String>,
    valuations: Vec<Valuation>,
    calls: AtomicU64,
}

impl Clone for Instance {
    fn clone(&self) -> Self {
        Self {
            item_names: self.item_names.clone(),
            valuations: self.valuations.clone(),
            calls: AtomicU64::new(self.calls.load(Ordering::Relaxed)),
        }
    }
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.item_names == other.item_names && self.valuations == other.valuations
    }
}
impl Eq for Instance {}

impl Instance {
    /// Builds an instance with explicit item names. One valuation per agent,
    /// each defined over exactly the named items.
    pub fn new(item_names: Vec<String>, valuations: Vec<Valuation>) -> Result<Self> {
        if valuations.is_empty() {
            return Err(Error::Parse("an instance needs at least one agent".into()));
        }
        for (agent, v) in valuations.iter().enumerate() {
            v.validate(item_names.len())
                .map_err(|e| Error::Parse(format!("valuation of agent {agent}: {}", e.detail())))?;
        }
        Ok(Self {
            item_names,
            valuations,
            calls: AtomicU64::new(0),
        })
    }

    /// Convenience constructor naming items "x1".."xm".
    pub fn with_default_names(item_count: usize, valuations: Vec<Valuation>) -> Result<Self> {
        let names = (1..=item_count).map(|i| format!("x{i}")).collect();
        Self::new(names, valuations)
    }

    /// Shorthand for an all-additive instance given the n×m value matrix.
    pub fn additive(matrix: &[Vec<Value>]) -> Result<Self> {
        let m = matrix.first().map_or(0, |row| row.len());
        let valuations = matrix
            .iter()
            .map(|row| Valuation::Additive { values: row.clone() })
            .collect();
        Self::with_default_names(m, valuations)
    }

    pub fn agent_count(&self) -> usize {
        self.valuations.len()
    }

    pub fn item_count(&self) -> usize {
        self.item_names.len()
    }

    pub fn item_names(&self) -> &[String] {
        &self.item_names
    }

    pub fn valuation(&self, agent: usize) -> &Valuation {
        &self.valuations[agent]
    }

    pub fn valuations(&self) -> &[Valuation] {
        &self.valuations
    }

    /// The metered value oracle: returns v_agent(subset) and increments the
    /// oracle-call counter.
    pub fn value(&self, agent: usize, subset: &BTreeSet<usize>) -> Result<Value> {
        self.value_without(agent, subset, None)
    }

    /// One oracle query for v_agent(subset ∖ {excluded}).
    pub fn value_without(
        &self,
        agent: usize,
        subset: &BTreeSet<usize>,
        excluded: Option<usize>,
    ) -> Result<Value> {
        let valuation = self
            .valuations
            .get(agent)
            .ok_or_else(|| Error::InvalidInput(format!("agent index {agent} out of range")))?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        valuation.eval_without(subset, excluded)
    }

    /// Number of oracle calls made through [`Instance::value`] so far.
    pub fn oracle_calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset_oracle_calls(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }

    /// Whether every valuation is monotone in the given direction. For
    /// `Goods` no agent may have a negative marginal anywhere; for `Chores`
    /// no positive marginal. Zero marginals are allowed in both directions.
    pub fn monotone_in(&self, direction: crate::Direction) -> Result<bool> {
        for v in &self.valuations {
            for x in 0..self.item_count() {
                let ok = matches!(
                    (item_polarity(v, x)?, direction),
                    (Polarity::Zero, _)
                        | (Polarity::Nonneg, crate::Direction::Goods)
                        | (Polarity::Nonpos, crate::Direction::Chores)
                );
                if !ok {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Classifies every item as a good, a chore, or mixed, and reports
    /// whether the instance is objective.
    ///
    /// An item is a good when every agent's marginals for it are nonnegative
    /// (all-zero counts as a good), a chore when every agent's marginals are
    /// nonpositive with at least one strict, and mixed otherwise.
    pub fn classify_items(&self) -> Result<Classification> {
        let m = self.item_count();
        let mut items = Vec::with_capacity(m);
        for x in 0..m {
            let mut any_pos = false;
            let mut any_neg = false;
            let mut mixed_within_agent = false;
            for v in &self.valuations {
                match item_polarity(v, x)? {
                    Polarity::Zero => {}
                    Polarity::Nonneg => any_pos = true,
                    Polarity::Nonpos => any_neg = true,
                    Polarity::Mixed => mixed_within_agent = true,
                }
            }
            let class = if mixed_within_agent || (any_pos && any_neg) {
                ItemClass::Mixed
            } else if any_neg {
                ItemClass::Chore
            } else {
                ItemClass::Good
            };
            items.push(class);
        }
        let objective = items.iter().all(|c| *c != ItemClass::Mixed);
        Ok(Classification { items, objective })
    }
}

/// Sign pattern of item `x`'s marginals under `valuation`.
///
/// Additive kinds read the per-item value; monotone kinds are nonnegative by
/// construction; explicit tables are checked over every subset.
fn item_polarity(valuation: &Valuation, x: usize) -> Result<Polarity> {
    match valuation {
        Valuation::Additive { values } => Ok(sign_polarity(values[x])),
        Valuation::BudgetAdditive { .. } | Valuation::PartitionMatroidRank { .. } => {
            Ok(Polarity::Nonneg)
        }
        Valuation::ExplicitTable { item_count, table } => {
            let m = *item_count;
            let bit = 1usize << x;
            let mut any_pos = false;
            let mut any_neg = false;
            for mask in 0..(1usize << m) {
                if mask & bit != 0 {
                    continue;
                }
                let marginal = table[mask | bit]
                    .checked_sub(table[mask])
                    .ok_or(Error::Overflow("explicit table marginal"))?;
                if marginal > 0 {
                    any_pos = true;
                } else if marginal < 0 {
                    any_neg = true;
                }
                if any_pos && any_neg {
                    return Ok(Polarity::Mixed);
                }
            }
            Ok(match (any_pos, any_neg) {
                (false, false) => Polarity::Zero,
                (true, false) => Polarity::Nonneg,
                (false, true) => Polarity::Nonpos,
                (true, true) => Polarity::Mixed,
            })
        }
    }
}

fn sign_polarity(v: Value) -> Polarity {
    match v.cmp(&0) {
        std::cmp::Ordering::Greater => Polarity::Nonneg,
        std::cmp::Ordering::Less => Polarity::Nonpos,
        std::cmp::Ordering::Equal => Polarity::Zero,
    }
}
