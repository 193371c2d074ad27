//! Allocations: partitions of the items into per-agent bundles plus an
//! unassigned pool.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// A (possibly partial) allocation. Every item lives in exactly one bundle
/// or in the unassigned pool; the constructors and mutators preserve that
/// partition invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Allocation {
    bundles: Vec<BTreeSet<usize>>,
    unassigned: BTreeSet<usize>,
}

impl Allocation {
    /// The empty allocation: all `m` items unassigned.
    pub fn empty(agents: usize, items: usize) -> Self {
        Self {
            bundles: vec![BTreeSet::new(); agents],
            unassigned: (0..items).collect(),
        }
    }

    /// Builds an allocation from explicit parts, validating that the bundles
    /// and the pool partition 0..m exactly.
    pub fn from_parts(
        bundles: Vec<BTreeSet<usize>>,
        unassigned: BTreeSet<usize>,
        items: usize,
    ) -> Result<Self> {
        let mut seen = vec![false; items];
        let mut mark = |x: usize| -> Result<()> {
            if x >= items {
                return Err(Error::Parse(format!(
                    "item index {x} out of range for {items} items"
                )));
            }
            if seen[x] {
                return Err(Error::Parse(format!("item {x} assigned twice")));
            }
            seen[x] = true;
            Ok(())
        };
        for bundle in &bundles {
            for &x in bundle {
                mark(x)?;
            }
        }
        for &x in &unassigned {
            mark(x)?;
        }
        if let Some(x) = seen.iter().position(|s| !s) {
            return Err(Error::Parse(format!("item {x} missing from the allocation")));
        }
        Ok(Self { bundles, unassigned })
    }

    /// Complete allocation from per-agent bundles only.
    pub fn complete_from_bundles(bundles: Vec<BTreeSet<usize>>, items: usize) -> Result<Self> {
        Self::from_parts(bundles, BTreeSet::new(), items)
    }

    pub fn agent_count(&self) -> usize {
        self.bundles.len()
    }

    pub fn item_count(&self) -> usize {
        self.bundles.iter().map(|b| b.len()).sum::<usize>() + self.unassigned.len()
    }

    pub fn bundle(&self, agent: usize) -> &BTreeSet<usize> {
        &self.bundles[agent]
    }

    pub fn bundles(&self) -> &[BTreeSet<usize>] {
        &self.bundles
    }

    pub fn unassigned(&self) -> &BTreeSet<usize> {
        &self.unassigned
    }

    pub fn is_complete(&self) -> bool {
        self.unassigned.is_empty()
    }

    /// Agent currently holding `item`, or `None` if it is unassigned.
    pub fn holder(&self, item: usize) -> Option<usize> {
        self.bundles.iter().position(|b| b.contains(&item))
    }

    /// Moves an unassigned item into an agent's bundle.
    pub fn assign(&mut self, item: usize, agent: usize) {
        debug_assert!(self.unassigned.contains(&item), "item {item} not in the pool");
        self.unassigned.remove(&item);
        self.bundles[agent].insert(item);
    }

    /// Returns an item from an agent's bundle to the pool.
    pub fn unassign(&mut self, item: usize, agent: usize) {
        debug_assert!(self.bundles[agent].contains(&item));
        self.bundles[agent].remove(&item);
        self.unassigned.insert(item);
    }

    /// Transfers an item between two bundles.
    pub fn transfer(&mut self, item: usize, from: usize, to: usize) {
        debug_assert!(self.bundles[from].contains(&item));
        self.bundles[from].remove(&item);
        self.bundles[to].insert(item);
    }
}
