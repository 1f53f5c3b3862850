use std::collections::{BTreeMap, BTreeSet};

use crate::address::CellAddress;

/// Precedent/dependent edges between cells.
///
/// Nodes are formula cells and cluster anchors. Each node keeps its ordered
/// expansion (duplicates kept) so callers can detect when a node's inputs
/// changed; the edge sets are the deduplicated view of it.
#[derive(Clone, Debug, Default)]
pub struct DependencyGraph {
    expansions: BTreeMap<CellAddress, Vec<CellAddress>>,
    precedents: BTreeMap<CellAddress, BTreeSet<CellAddress>>,
    dependents: BTreeMap<CellAddress, BTreeSet<CellAddress>>,
}

impl DependencyGraph {
    pub fn is_node(&self, addr: CellAddress) -> bool {
        self.expansions.contains_key(&addr)
    }

    pub fn nodes(&self) -> impl Iterator<Item = CellAddress> + '_ {
        self.expansions.keys().copied()
    }

    pub fn expansion(&self, addr: CellAddress) -> Option<&[CellAddress]> {
        self.expansions.get(&addr).map(Vec::as_slice)
    }

    pub fn precedents(&self, addr: CellAddress) -> impl Iterator<Item = CellAddress> + '_ {
        self.precedents.get(&addr).into_iter().flatten().copied()
    }

    pub fn dependents(&self, addr: CellAddress) -> impl Iterator<Item = CellAddress> + '_ {
        self.dependents.get(&addr).into_iter().flatten().copied()
    }

    /// Replaces the inputs of `node`. Returns whether the expansion changed.
    pub fn set_node(&mut self, node: CellAddress, expansion: Vec<CellAddress>) -> bool {
        if self.expansions.get(&node) == Some(&expansion) {
            return false;
        }
        self.unlink(node);
        let set: BTreeSet<CellAddress> = expansion.iter().copied().collect();
        for p in &set {
            self.dependents.entry(*p).or_default().insert(node);
        }
        self.precedents.insert(node, set);
        self.expansions.insert(node, expansion);
        true
    }

    /// Returns whether `node` was present.
    pub fn remove_node(&mut self, node: CellAddress) -> bool {
        self.unlink(node);
        self.precedents.remove(&node);
        self.expansions.remove(&node).is_some()
    }

    fn unlink(&mut self, node: CellAddress) {
        if let Some(old) = self.precedents.get(&node) {
            for p in old {
                if let Some(deps) = self.dependents.get_mut(p) {
                    deps.remove(&node);
                    if deps.is_empty() {
                        self.dependents.remove(p);
                    }
                }
            }
        }
    }

    /// `seeds` plus everything downstream of them.
    pub fn downstream(
        &self,
        seeds: impl IntoIterator<Item = CellAddress>,
    ) -> BTreeSet<CellAddress> {
        let mut seen: BTreeSet<CellAddress> = BTreeSet::new();
        let mut stack: Vec<CellAddress> = seeds.into_iter().collect();
        while let Some(a) = stack.pop() {
            if seen.insert(a) {
                stack.extend(self.dependents(a).filter(|d| !seen.contains(d)));
            }
        }
        seen
    }

    /// Topological order of `nodes` with respect to edges inside the set.
    /// Nodes on a cycle or downstream of one are returned separately.
    pub fn order(&self, nodes: &BTreeSet<CellAddress>) -> (Vec<CellAddress>, Vec<CellAddress>) {
        let mut indegree: BTreeMap<CellAddress, usize> = nodes
            .iter()
            .map(|n| {
                (
                    *n,
                    self.precedents(*n).filter(|p| nodes.contains(p)).count(),
                )
            })
            .collect();
        let mut ready: BTreeSet<CellAddress> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(n, _)| *n)
            .collect();
        let mut order = Vec::with_capacity(nodes.len());
        while let Some(n) = ready.pop_first() {
            order.push(n);
            indegree.remove(&n);
            for d in self.dependents(n) {
                if let Some(deg) = indegree.get_mut(&d) {
                    *deg -= 1;
                    if *deg == 0 {
                        ready.insert(d);
                    }
                }
            }
        }
        (order, indegree.into_keys().collect())
    }

    /// Checks that the two edge maps are exact inverses of each other and of
    /// the stored expansions.
    pub fn is_consistent(&self) -> bool {
        let forward: BTreeSet<(CellAddress, CellAddress)> = self
            .precedents
            .iter()
            .flat_map(|(n, ps)| ps.iter().map(move |p| (*n, *p)))
            .collect();
        let backward: BTreeSet<(CellAddress, CellAddress)> = self
            .dependents
            .iter()
            .flat_map(|(p, ds)| ds.iter().map(move |d| (*d, *p)))
            .collect();
        let from_expansions: BTreeSet<(CellAddress, CellAddress)> = self
            .expansions
            .iter()
            .flat_map(|(n, ps)| ps.iter().map(move |p| (*n, *p)))
            .collect();
        forward == backward
            && forward == from_expansions
            && self.precedents.keys().eq(self.expansions.keys())
    }
}
