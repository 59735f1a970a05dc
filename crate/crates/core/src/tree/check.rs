//! Structural checks used by tests, the acceptance suite and debug assertions.

use super::{HETree, NodeId};
use crate::data::object_order;
use crate::stats::NodeStats;

impl HETree {
    /// Verifies every full-mode invariant; returns the first violation.
    pub fn check_invariants(&self) -> Result<(), String> {
        let root = self.root.ok_or("tree has no root")?;
        if self.node(root).parent.is_some() {
            return Err("root has a parent".into());
        }
        let d = self.params.degree;
        for n in self.nodes() {
            if n.is_leaf() != n.children.is_empty() {
                return Err(format!("node {} leaf/children mismatch", n.id));
            }
            if !n.is_leaf() && !n.data.is_empty() {
                return Err(format!("internal node {} holds data", n.id));
            }
            if n.children.len() > d.max(1) {
                return Err(format!("node {} has {} children, degree {d}", n.id, n.children.len()));
            }
            for &c in &n.children {
                let child = self.get(c).ok_or_else(|| format!("node {} has dangling child {c}", n.id))?;
                if child.parent != Some(n.id) {
                    return Err(format!("child {c} does not point back to {}", n.id));
                }
                if child.height >= n.height {
                    return Err(format!("child {c} is not below {}", n.id));
                }
            }
            if let (Some(&f), Some(&l)) = (n.children.first(), n.children.last()) {
                let (fi, li) = (self.node(f).interval, self.node(l).interval);
                if n.interval.lower != fi.lower || n.interval.upper != li.upper || n.interval.upper_closed != li.upper_closed {
                    return Err(format!("node {} interval {} is not the hull of its children", n.id, n.interval));
                }
            }
            if n.is_leaf() {
                let ds = &self.dataset;
                if n.data.windows(2).any(|w| object_order(ds.get(w[0]), ds.get(w[1])).is_gt()) {
                    return Err(format!("leaf {} data unsorted", n.id));
                }
                if let Some(&bad) = n.data.iter().find(|&&i| !n.interval.contains(ds.value(i))) {
                    return Err(format!("leaf {} holds {} outside {}", n.id, ds.value(bad), n.interval));
                }
            }
            let direct = NodeStats::from_values(self.values(n.id));
            if !n.stats.approx_eq(&direct, 1e-9) {
                return Err(format!("node {} stats {:?} differ from direct {:?}", n.id, n.stats, direct));
            }
        }
        for (h, level) in self.levels.iter().enumerate() {
            for w in level.windows(2) {
                let (a, b) = (self.node(w[0]).interval, self.node(w[1]).interval);
                if a.lower > b.lower || a.upper > b.lower {
                    return Err(format!("level {h} intervals {a} and {b} overlap"));
                }
            }
        }
        Ok(())
    }

    /// Every leaf at height 0 and every internal node exactly one above its children.
    pub fn is_balanced(&self) -> bool {
        self.nodes().all(|n| n.children.iter().all(|&c| self.node(c).height + 1 == n.height))
    }

    /// Internal node bound `(dℓ−1)/(d−1)`.
    pub fn internal_bound(leaves: usize, degree: usize) -> usize {
        (degree * leaves - 1) / (degree - 1)
    }
}

/// Node-by-node comparison of two trees in level order: shape, intervals, contents and stats.
pub fn compare_trees(a: &HETree, b: &HETree, rel: f64) -> Result<(), String> {
    let (ra, rb) = (a.root.ok_or("left tree has no root")?, b.root.ok_or("right tree has no root")?);
    compare_subtrees(a, ra, b, rb, rel)
}

/// Compares the subtree of `a` at `ra` against the subtree of `b` at `rb`.
pub fn compare_subtrees(a: &HETree, ra: NodeId, b: &HETree, rb: NodeId, rel: f64) -> Result<(), String> {
    let mut stack = vec![(ra, rb)];
    while let Some((x, y)) = stack.pop() {
        let (nx, ny) = (a.node(x), b.node(y));
        let at = || format!("height {} interval {}", nx.height, nx.interval);
        if nx.children.len() != ny.children.len() {
            return Err(format!("{}: {} vs {} children", at(), nx.children.len(), ny.children.len()));
        }
        if nx.is_leaf() != ny.is_leaf() {
            return Err(format!("{}: leaf mismatch", at()));
        }
        if !nx.interval.approx_eq(&ny.interval, rel) {
            return Err(format!("{}: interval {} vs {}", at(), nx.interval, ny.interval));
        }
        if !nx.stats.approx_eq(&ny.stats, rel) {
            return Err(format!("{}: stats {:?} vs {:?}", at(), nx.stats, ny.stats));
        }
        if nx.is_leaf() {
            let subjects = |t: &HETree, data: &[u32]| -> Vec<(f64, String)> {
                data.iter().map(|&i| (t.dataset.value(i), t.dataset.get(i).subject.to_string())).collect()
            };
            if subjects(a, &nx.data) != subjects(b, &ny.data) {
                return Err(format!("{}: leaf contents differ", at()));
            }
        }
        stack.extend(nx.children.iter().copied().zip(ny.children.iter().copied()));
    }
    Ok(())
}
