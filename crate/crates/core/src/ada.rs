//! Adapting a built tree to a new degree or leaf count, reusing nodes and statistics.
//!
//! Each case keeps whatever the new shape shares with the old one: whole levels when the
//! degree becomes a power of the old one, leaves when only the degree changes, merged
//! leaves when the leaf count divides, and fully contained leaf statistics otherwise.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::counters::BuildCounters;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::stats::NodeStats;
use crate::tree::build::{leaf_node, parent_of};
use crate::tree::layout::{ContentLayout, Grouping, RangeFrame};
use crate::tree::{BuildMode, HETree, NodeId, TreeParams, Variant};

/// Which reuse strategy applies. Exactly one knob changes per adaptation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AdaptationCase {
    /// d′ = dᵏ.
    DegreePow { k: u32 },
    /// d′ = k·d.
    DegreeMult { k: usize },
    /// d = d′ᵏ.
    DegreeRoot { k: u32 },
    DegreeOther,
    /// ℓ′ > ℓ.
    LeavesIncrease,
    /// ℓ′ = ℓ/dᵏ.
    LeavesDivPow { k: u32 },
    /// ℓ′ = ℓ/k.
    LeavesDiv { k: usize },
    /// ℓ′ = ℓ − k.
    LeavesMinus { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdaptTarget {
    Degree(usize),
    Leaves(usize),
}

/// How the case was carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// The case's own reuse strategy.
    Direct,
    /// Merged content-variant leaves would not match a fresh layout; rebuilt with leaf-stat reuse.
    Rebuild,
}

/// Smallest `k > 1` with `base^k == value`.
fn exact_power(base: usize, value: usize) -> Option<u32> {
    if base < 2 {
        return None;
    }
    let mut acc = base;
    let mut k = 1;
    while acc < value {
        acc = acc.checked_mul(base)?;
        k += 1;
    }
    (acc == value && k > 1).then_some(k)
}

/// Classifies a change of one knob. Degree cases are tested Pow, Mult, Root, then Other;
/// leaf cases Increase, DivPow, Div, then Minus.
pub fn classify(d: usize, l: usize, d2: usize, l2: usize) -> Result<AdaptationCase> {
    if d2 < 2 || l2 < 1 {
        return Err(Error::InvalidParams(format!("degree {d2} and leaf count {l2} must be at least 2 and 1")));
    }
    match (d2 != d, l2 != l) {
        (false, false) => Err(Error::NoChange),
        (true, true) => Err(Error::Unsupported("change degree and leaf count in separate steps".into())),
        (true, false) => Ok(if let Some(k) = exact_power(d, d2) {
            AdaptationCase::DegreePow { k }
        } else if d2 % d == 0 {
            AdaptationCase::DegreeMult { k: d2 / d }
        } else if let Some(k) = exact_power(d2, d) {
            AdaptationCase::DegreeRoot { k }
        } else {
            AdaptationCase::DegreeOther
        }),
        (false, true) => Ok(if l2 > l {
            AdaptationCase::LeavesIncrease
        } else if l % l2 == 0 {
            let k = l / l2;
            match exact_power(d, k) {
                Some(m) => AdaptationCase::LeavesDivPow { k: m },
                None if k == d => AdaptationCase::LeavesDivPow { k: 1 },
                None => AdaptationCase::LeavesDiv { k },
            }
        } else {
            AdaptationCase::LeavesMinus { k: l - l2 }
        }),
    }
}

/// Construction and statistics work split by leaves/internals and scratch/derived.
///
/// "Derived" means built from existing nodes or statistics; retaining a node unchanged counts nowhere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdaptationReport {
    pub case: AdaptationCase,
    pub route: Route,
    pub leaves_scratch: u64,
    pub leaves_derived: u64,
    pub internals_scratch: u64,
    pub internals_derived: u64,
    pub stats_leaves_scratch: u64,
    pub stats_leaves_derived: u64,
    pub stats_internals_scratch: u64,
    pub stats_internals_derived: u64,
    pub objects_scanned: u64,
    /// Objects under the reconstruction root.
    pub m: u64,
    /// (d′ℓ′−1)/(d′−1).
    pub e: f64,
    /// (d′ᵏℓ′−1)/(d′ᵏ−1), degree-root case only.
    pub r: Option<f64>,
    pub degree: usize,
    pub leaves: usize,
}

impl AdaptationReport {
    fn new(case: AdaptationCase, m: usize, d2: usize, l2: usize) -> Self {
        let e = (d2 as f64 * l2 as f64 - 1.0) / (d2 as f64 - 1.0);
        let r = match case {
            AdaptationCase::DegreeRoot { k } => {
                let dk = (d2 as f64).powi(k as i32);
                Some((dk * l2 as f64 - 1.0) / (dk - 1.0))
            }
            _ => None,
        };
        Self {
            case,
            route: Route::Direct,
            leaves_scratch: 0,
            leaves_derived: 0,
            internals_scratch: 0,
            internals_derived: 0,
            stats_leaves_scratch: 0,
            stats_leaves_derived: 0,
            stats_internals_scratch: 0,
            stats_internals_derived: 0,
            objects_scanned: 0,
            m: m as u64,
            e,
            r,
            degree: d2,
            leaves: l2,
        }
    }

    pub fn counters(&self) -> BuildCounters {
        BuildCounters {
            nodes_built: self.leaves_scratch + self.leaves_derived + self.internals_scratch + self.internals_derived,
            leaves_built: self.leaves_scratch + self.leaves_derived,
            stats_from_scratch: self.stats_leaves_scratch + self.stats_internals_scratch,
            stats_aggregated: self.stats_leaves_derived + self.stats_internals_derived,
            objects_scanned: self.objects_scanned,
        }
    }

    pub const CSV_HEADER: &'static str = "case,route,degree,leaves,leaves_scratch,leaves_derived,internals_scratch,internals_derived,stats_leaves_scratch,stats_leaves_derived,stats_internals_scratch,stats_internals_derived,objects_scanned";

    pub fn csv_row(&self) -> String {
        let case = serde_json::to_value(self.case).ok().and_then(|v| v["kind"].as_str().map(str::to_owned)).unwrap_or_default();
        let route = match self.route {
            Route::Direct => "direct",
            Route::Rebuild => "rebuild",
        };
        format!(
            "{case},{route},{},{},{},{},{},{},{},{},{},{},{}",
            self.degree,
            self.leaves,
            self.leaves_scratch,
            self.leaves_derived,
            self.internals_scratch,
            self.internals_derived,
            self.stats_leaves_scratch,
            self.stats_leaves_derived,
            self.stats_internals_scratch,
            self.stats_internals_derived,
            self.objects_scanned
        )
    }
}

/// Nodes of the subtree at `root`, grouped by height, each level left to right.
pub fn subtree_levels(tree: &HETree, root: NodeId) -> Vec<Vec<NodeId>> {
    let mut levels: Vec<Vec<NodeId>> = vec![Vec::new(); tree.node(root).height as usize + 1];
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        let n = tree.node(id);
        levels[n.height as usize].push(id);
        stack.extend(n.children.iter().rev());
    }
    levels
}

/// The subtree must look exactly like a fresh build of its leaves with `degree`.
fn check_well_formed(tree: &HETree, levels: &[Vec<NodeId>], degree: usize) -> Result<()> {
    let g = Grouping::new(levels[0].len(), degree);
    let bad = |why: String| Err(Error::Unsupported(format!("reconstruction root is not a well-formed subtree: {why}")));
    if levels.len() as u32 != g.height() + 1 {
        return bad(format!("height {} but {} leaves need {}", levels.len() - 1, levels[0].len(), g.height()));
    }
    for (h, level) in levels.iter().enumerate() {
        if level.len() != g.count(h as u32) {
            return bad(format!("{} nodes at height {h}", level.len()));
        }
        if h == 0 {
            continue;
        }
        for (i, &id) in level.iter().enumerate() {
            let n = tree.node(id);
            if n.children.len() != g.children(h as u32, i).len() {
                return bad(format!("node {id} has {} children", n.children.len()));
            }
        }
    }
    Ok(())
}

/// Adapts the subtree under `root` (default: the whole tree) and returns the id of the node
/// now in its place.
pub fn adapt(tree: &mut HETree, root: Option<NodeId>, target: AdaptTarget) -> Result<(NodeId, AdaptationReport)> {
    if tree.mode() != BuildMode::Full {
        return Err(Error::Unsupported("adaptation needs a fully built tree".into()));
    }
    let whole = tree.root().ok_or_else(|| Error::Invariant("tree has no root".into()))?;
    let r = root.unwrap_or(whole);
    if !tree.contains(r) {
        return Err(Error::UnknownNode(r));
    }
    if tree.node(r).is_leaf() {
        return Err(Error::Unsupported("reconstruction root must be an internal node".into()));
    }
    let d = tree.params().degree;
    let levels = subtree_levels(tree, r);
    check_well_formed(tree, &levels, d)?;
    let l = levels[0].len();
    let (d2, l2) = match target {
        AdaptTarget::Degree(d2) => (d2, l),
        AdaptTarget::Leaves(l2) => (d, l2),
    };
    let case = classify(d, l, d2, l2)?;
    let objects = tree.contents(r);
    let variant = tree.params().variant;
    if variant == Variant::C && l2 > objects.len() {
        return Err(Error::InvalidParams(format!("{l2} leaves exceed {} objects", objects.len())));
    }
    let old: Vec<NodeId> = levels.iter().flatten().copied().collect();
    let parent = tree.node(r).parent;
    let mut report = AdaptationReport::new(case, objects.len(), d2, l2);
    let mut cx = Context { tree, levels, objects, report: &mut report, d2, l2, r };
    let new_root = match case {
        AdaptationCase::DegreePow { k } => cx.degree_pow(k),
        AdaptationCase::DegreeMult { k } => cx.rebuild_internals(Some(k)),
        AdaptationCase::DegreeOther => cx.rebuild_internals(None),
        AdaptationCase::DegreeRoot { k } => cx.degree_root(k),
        AdaptationCase::LeavesIncrease => cx.rebuild_all(false),
        AdaptationCase::LeavesMinus { .. } => cx.rebuild_all(true),
        AdaptationCase::LeavesDivPow { k } => {
            if cx.merge_aligned(d.pow(k)) {
                cx.leaves_div_pow(k)
            } else {
                cx.report.route = Route::Rebuild;
                cx.rebuild_all(true)
            }
        }
        AdaptationCase::LeavesDiv { k } => {
            if cx.merge_aligned(k) {
                cx.leaves_div(k)
            } else {
                cx.report.route = Route::Rebuild;
                cx.rebuild_all(true)
            }
        }
    }?;

    if new_root != r {
        match parent {
            Some(_) => replace_node(tree, r, new_root),
            None => tree.root = Some(new_root),
        }
    }
    // Heights are stale until reindexing, so collect by traversal.
    let mut keep = HashSet::new();
    let mut stack = vec![new_root];
    while let Some(id) = stack.pop() {
        keep.insert(id);
        stack.extend(tree.node(id).children.iter().copied());
    }
    for id in old {
        if !keep.contains(&id) {
            tree.remove(id);
        }
    }
    tree.reindex();
    if r == whole {
        tree.params = TreeParams::new(variant, l2, d2);
        if let Some(f) = tree.frame.as_mut() {
            *f = f.with_leaves(l2);
        }
    }
    Ok((new_root, report))
}

struct Context<'a> {
    tree: &'a mut HETree,
    levels: Vec<Vec<NodeId>>,
    /// Sorted object indices under the reconstruction root.
    objects: Vec<u32>,
    report: &'a mut AdaptationReport,
    d2: usize,
    l2: usize,
    r: NodeId,
}

impl Context<'_> {
    fn old_height(&self) -> usize {
        self.levels.len() - 1
    }

    /// Keeps levels at multiples of k and the root; reconnects with the new degree.
    fn degree_pow(&mut self, k: u32) -> Result<NodeId> {
        let k = k as usize;
        let top = Grouping::new(self.levels[0].len(), self.d2).height() as usize;
        for j in 1..=top {
            let parents = if j == top { vec![self.r] } else { self.levels[j * k].clone() };
            let children = self.levels[(j - 1) * k].clone();
            create_edges(self.tree, &parents, &children, self.d2)?;
        }
        Ok(self.r)
    }

    /// Keeps the leaves and rebuilds every internal node. With `mult = Some(k)` height-1
    /// statistics come from the k old height-1 nodes each new one covers.
    fn rebuild_internals(&mut self, mult: Option<usize>) -> Result<NodeId> {
        let leaves = self.levels[0].clone();
        let old_first: Vec<NodeStats> = self.levels[1].iter().map(|&id| self.tree.node(id).stats).collect();
        let mut level = Vec::new();
        for (i, chunk) in leaves.chunks(self.d2).enumerate() {
            let stats = match mult {
                Some(k) => {
                    let end = ((i + 1) * k).min(old_first.len());
                    self.report.internals_scratch += 1;
                    self.report.stats_internals_derived += 1;
                    NodeStats::merge(&old_first[i * k..end])
                }
                None => {
                    self.report.internals_scratch += 1;
                    self.report.stats_internals_scratch += 1;
                    NodeStats::merge(chunk.iter().map(|&c| &self.tree.node(c).stats))
                }
            };
            level.push(internal_with_stats(self.tree, chunk.to_vec(), 1, stats));
        }
        Ok(self.build_upward(level, 2))
    }

    /// Groups `level` by d′ until one node remains; new nodes merge their children's stats.
    fn build_upward(&mut self, mut level: Vec<NodeId>, mut height: u32) -> NodeId {
        while level.len() > 1 {
            level = level
                .chunks(self.d2)
                .map(|g| {
                    self.report.internals_scratch += 1;
                    self.report.stats_internals_scratch += 1;
                    parent_of(self.tree, g.to_vec(), height)
                })
                .collect();
            height += 1;
        }
        level[0]
    }

    /// Inserts k−1 levels of degree d′ between every node and its children
    /// (fewer at the root, so the height matches a fresh build).
    fn degree_root(&mut self, k: u32) -> Result<NodeId> {
        let k = k as usize;
        let h_old = self.old_height();
        let top = Grouping::new(self.levels[0].len(), self.d2).height() as usize;
        for h in 1..=h_old {
            let inserts = if h == h_old { top - (h_old - 1) * k - 1 } else { k - 1 };
            for id in self.levels[h].clone() {
                let mut cur = self.tree.node(id).children.clone();
                for t in 1..=inserts {
                    let height = ((h - 1) * k + t) as u32;
                    cur = cur
                        .chunks(self.d2)
                        .map(|g| {
                            self.report.internals_scratch += 1;
                            self.report.stats_internals_scratch += 1;
                            parent_of(self.tree, g.to_vec(), height)
                        })
                        .collect();
                }
                if cur.len() > self.d2 {
                    return Err(Error::Invariant(format!("node {id} keeps {} children after insertion", cur.len())));
                }
                for &c in &cur {
                    self.tree.node_mut(c).parent = Some(id);
                }
                self.tree.node_mut(id).children = cur;
            }
        }
        Ok(self.r)
    }

    /// New leaf boundaries as positions in `objects`, one per new leaf plus the end.
    fn fresh_boundaries(&self, leaves: usize) -> Vec<usize> {
        match self.tree.params().variant {
            Variant::C => {
                let layout = ContentLayout::new(self.objects.len(), leaves);
                (0..=leaves).map(|j| layout.leaf_start(j)).collect()
            }
            Variant::R => {
                let frame = self.frame(leaves);
                let mut bounds = vec![0usize; leaves + 1];
                for &i in &self.objects {
                    bounds[frame.leaf_of(self.tree.dataset().value(i)) + 1] += 1;
                }
                for j in 0..leaves {
                    bounds[j + 1] += bounds[j];
                }
                bounds
            }
        }
    }

    fn frame(&self, leaves: usize) -> RangeFrame {
        RangeFrame::over(&self.tree.node(self.r).interval, leaves)
    }

    /// Merging m consecutive old leaves reproduces a fresh content layout.
    fn merge_aligned(&self, m: usize) -> bool {
        if self.tree.params().variant == Variant::R {
            return true;
        }
        let fresh = self.fresh_boundaries(self.l2);
        let mut acc = 0usize;
        for (i, chunk) in self.levels[0].chunks(m).enumerate() {
            if fresh[i] != acc {
                return false;
            }
            acc += chunk.iter().map(|&l| self.tree.node(l).data.len()).sum::<usize>();
        }
        fresh[self.l2] == acc
    }

    /// Each merged leaf replaces the height-k node covering the same leaves and takes its stats.
    fn leaves_div_pow(&mut self, k: u32) -> Result<NodeId> {
        let m = self.tree.params().degree.pow(k);
        let merged = merge_leaves_with(self.tree, &self.levels[0].clone(), m, |_, i| {
            MergedStats::Taken(i)
        }, &self.levels[k as usize]);
        self.report.leaves_derived += merged.len() as u64;
        if k as usize == self.old_height() {
            let leaf = merged[0];
            self.tree.node_mut(leaf).parent = Some(self.r);
            self.tree.node_mut(self.r).children = vec![leaf];
            return Ok(self.r);
        }
        for (&old, &new) in self.levels[k as usize].clone().iter().zip(&merged) {
            replace_node(self.tree, old, new);
        }
        Ok(self.r)
    }

    fn leaves_div(&mut self, k: usize) -> Result<NodeId> {
        let merged = merge_leaves_with(self.tree, &self.levels[0].clone(), k, |_, _| MergedStats::Merge, &[]);
        self.report.leaves_derived += merged.len() as u64;
        self.report.stats_leaves_derived += merged.len() as u64;
        let level = self.group_leaves(merged);
        Ok(self.build_upward(level, 2))
    }

    fn group_leaves(&mut self, leaves: Vec<NodeId>) -> Vec<NodeId> {
        leaves
            .chunks(self.d2)
            .map(|g| {
                self.report.internals_scratch += 1;
                self.report.stats_internals_scratch += 1;
                parent_of(self.tree, g.to_vec(), 1)
            })
            .collect()
    }

    /// Fresh leaves over the existing sorted objects. With `reuse`, an old leaf whose objects
    /// all land in one new leaf contributes its stats instead of its raw values.
    fn rebuild_all(&mut self, reuse: bool) -> Result<NodeId> {
        let variant = self.tree.params().variant;
        let bounds = self.fresh_boundaries(self.l2);
        let ds = self.tree.dataset().clone();
        let frame = self.frame(self.l2);
        // `pos` indexes `objects`; content layouts place by position, range frames by value.
        let new_leaf_of = |pos: usize, obj: u32| -> usize {
            match variant {
                Variant::C => bounds.partition_point(|&b| b <= pos) - 1,
                Variant::R => frame.leaf_of(ds.value(obj)),
            }
        };
        let mut parts: Vec<Vec<NodeStats>> = vec![Vec::new(); self.l2];
        let mut raw: Vec<Vec<f64>> = vec![Vec::new(); self.l2];
        let mut pos = 0usize;
        for &old in &self.levels[0] {
            let n = self.tree.node(old);
            let len = n.data.len();
            if len == 0 {
                continue;
            }
            let first = new_leaf_of(pos, n.data[0]);
            let last = new_leaf_of(pos + len - 1, n.data[len - 1]);
            if reuse && first == last {
                parts[first].push(n.stats);
            } else {
                for (off, &obj) in n.data.iter().enumerate() {
                    raw[new_leaf_of(pos + off, obj)].push(ds.value(obj));
                }
                self.report.objects_scanned += len as u64;
            }
            pos += len;
        }
        let mut leaves = Vec::with_capacity(self.l2);
        for j in 0..self.l2 {
            let data = self.objects[bounds[j]..bounds[j + 1]].to_vec();
            let interval = match variant {
                Variant::C => Interval::closed(ds.value(data[0]), ds.value(data[data.len() - 1])),
                Variant::R => frame.span(j..j + 1),
            };
            let from_raw = NodeStats::from_values(raw[j].iter().copied());
            let stats = NodeStats::merge(parts[j].iter().chain([&from_raw]));
            if parts[j].is_empty() {
                self.report.stats_leaves_scratch += 1;
            } else {
                self.report.stats_leaves_derived += 1;
            }
            self.report.leaves_scratch += 1;
            leaves.push(self.tree.alloc(leaf_node(interval, data, stats)));
        }
        let level = self.group_leaves(leaves);
        Ok(self.build_upward(level, 2))
    }
}

fn internal_with_stats(tree: &mut HETree, children: Vec<NodeId>, height: u32, stats: NodeStats) -> NodeId {
    let id = parent_of(tree, children, height);
    tree.node_mut(id).stats = stats;
    id
}

enum MergedStats {
    /// Take the stats of `sources[i]`.
    Taken(usize),
    Merge,
}

fn merge_leaves_with(
    tree: &mut HETree,
    leaves: &[NodeId],
    m: usize,
    how: impl Fn(&[NodeId], usize) -> MergedStats,
    sources: &[NodeId],
) -> Vec<NodeId> {
    leaves
        .chunks(m)
        .enumerate()
        .map(|(i, chunk)| {
            let stats = match how(chunk, i) {
                MergedStats::Taken(s) => tree.node(sources[s]).stats,
                MergedStats::Merge => NodeStats::merge(chunk.iter().map(|&c| &tree.node(c).stats)),
            };
            let data: Vec<u32> = chunk.iter().flat_map(|&c| tree.node(c).data.iter().copied()).collect();
            let interval = Interval::hull(&tree.node(chunk[0]).interval, &tree.node(chunk[chunk.len() - 1]).interval);
            tree.alloc(leaf_node(interval, data, stats))
        })
        .collect()
}

/// Merges every `m` consecutive leaves (the last group takes the remainder) into new leaves
/// with concatenated data, hull intervals and merged stats. The old leaves stay in the arena.
pub fn merge_leaves(tree: &mut HETree, leaves: &[NodeId], m: usize) -> Vec<NodeId> {
    merge_leaves_with(tree, leaves, m.max(1), |_, _| MergedStats::Merge, &[])
}

/// Puts `n2` in `n1`'s place: the same child slot of `n1`'s parent, or the root.
pub fn replace_node(tree: &mut HETree, n1: NodeId, n2: NodeId) {
    let parent = tree.node(n1).parent;
    match parent {
        Some(p) => {
            let slot = tree.node(p).children.iter().position(|&c| c == n1).expect("child listed by its parent");
            tree.node_mut(p).children[slot] = n2;
        }
        None => tree.root = Some(n2),
    }
    tree.node_mut(n2).parent = parent;
}

/// `parents[i]` adopts `children[i·d .. i·d + d]`.
pub fn create_edges(tree: &mut HETree, parents: &[NodeId], children: &[NodeId], d: usize) -> Result<()> {
    if children.len() > parents.len() * d {
        return Err(Error::Invariant(format!("{} children exceed {} parents of degree {d}", children.len(), parents.len())));
    }
    for (i, &p) in parents.iter().enumerate() {
        let start = (i * d).min(children.len());
        let group = children[start..(start + d).min(children.len())].to_vec();
        for &c in &group {
            tree.node_mut(c).parent = Some(p);
        }
        tree.node_mut(p).children = group;
    }
    Ok(())
}

/// A fresh tree over the objects under `root` with the given shape, for equivalence checks.
/// Range trees tile the root's interval.
pub fn rebuild_reference(tree: &HETree, root: NodeId, leaves: usize, degree: usize) -> Result<HETree> {
    let objects = tree.contents(root);
    let ds = tree.dataset().clone();
    let built = match tree.params().variant {
        Variant::C => crate::tree::build_c_over(ds, &objects, leaves, degree)?,
        Variant::R => crate::tree::build_r_over(ds, &objects, RangeFrame::over(&tree.node(root).interval, leaves), degree)?,
    };
    Ok(built.0)
}
