//! Full bottom-up construction of both variants.

use super::layout::{ContentLayout, RangeFrame};
use super::{BuildMode, HETree, Node, NodeId, TreeParams, Variant};
use crate::counters::BuildCounters;
use crate::data::SharedDataset;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::stats::NodeStats;

/// Builds a content-variant tree: ℓ leaves of λ or λ−1 consecutive objects of S.
pub fn build_hetree_c(s: impl Into<SharedDataset>, leaves: usize, degree: usize) -> Result<(HETree, BuildCounters)> {
    build_tree(s, TreeParams::new(Variant::C, leaves, degree))
}

/// Builds a range-variant tree: ℓ equal-width leaves tiling `[minv, maxv]`.
pub fn build_hetree_r(s: impl Into<SharedDataset>, leaves: usize, degree: usize) -> Result<(HETree, BuildCounters)> {
    build_tree(s, TreeParams::new(Variant::R, leaves, degree))
}

pub fn build_tree(s: impl Into<SharedDataset>, params: TreeParams) -> Result<(HETree, BuildCounters)> {
    let s = s.into();
    if !s.is_sorted() {
        return Err(Error::Unsorted);
    }
    params.validate(s.len())?;
    let all: Vec<u32> = (0..s.len() as u32).collect();
    match params.variant {
        Variant::C => build_c_over(s, &all, params.leaves, params.degree),
        Variant::R => {
            let (lo, hi) = (s.minv().unwrap_or(0.0), s.maxv().unwrap_or(0.0));
            if lo >= hi {
                return Err(Error::DegenerateRange);
            }
            build_r_over(s, &all, RangeFrame::new(lo, hi, params.leaves), params.degree)
        }
    }
}

/// Content-variant build over `objects`, a sorted list of indices into `s`.
pub(crate) fn build_c_over(
    s: SharedDataset,
    objects: &[u32],
    leaves: usize,
    degree: usize,
) -> Result<(HETree, BuildCounters)> {
    let params = TreeParams::new(Variant::C, leaves, degree);
    params.validate(objects.len())?;
    let layout = ContentLayout::new(objects.len(), leaves);
    let mut tree = HETree::empty(params, s, BuildMode::Full, None);
    let mut counters = BuildCounters::default();
    let level: Vec<NodeId> = (0..leaves)
        .map(|j| {
            let data = objects[layout.leaf_range(j)].to_vec();
            let leaf = content_leaf(&tree, data, &mut counters);
            tree.alloc(leaf)
        })
        .collect();
    finish(tree, level, degree, counters)
}

/// Range-variant build over `objects` (sorted indices into `s`) tiled by `frame`.
pub(crate) fn build_r_over(
    s: SharedDataset,
    objects: &[u32],
    frame: RangeFrame,
    degree: usize,
) -> Result<(HETree, BuildCounters)> {
    let params = TreeParams::new(Variant::R, frame.leaves, degree);
    params.validate(objects.len().max(1))?;
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); frame.leaves];
    for &i in objects {
        buckets[frame.leaf_of(s.value(i))].push(i);
    }
    let mut tree = HETree::empty(params, s, BuildMode::Full, Some(frame));
    let mut counters = BuildCounters { objects_scanned: objects.len() as u64, ..Default::default() };
    let level: Vec<NodeId> = buckets
        .into_iter()
        .enumerate()
        .map(|(j, data)| {
            let stats = NodeStats::from_values(data.iter().map(|&i| tree.dataset.value(i)));
            counters.stats_from_scratch += 1;
            counters.nodes_built += 1;
            counters.leaves_built += 1;
            tree.alloc(leaf_node(frame.span(j..j + 1), data, stats))
        })
        .collect();
    finish(tree, level, degree, counters)
}

fn finish(mut tree: HETree, level: Vec<NodeId>, degree: usize, mut counters: BuildCounters) -> Result<(HETree, BuildCounters)> {
    let before = tree.nodes.len();
    let root = constr_internal_nodes(&mut tree, level, degree);
    let internals = (tree.nodes.len() - before) as u64;
    counters.nodes_built += internals;
    counters.stats_aggregated += internals;
    tree.root = Some(root);
    tree.reindex();
    Ok((tree, counters))
}

/// Leaf over consecutive sorted objects; interval `[first, last]`.
pub(crate) fn content_leaf(tree: &HETree, data: Vec<u32>, counters: &mut BuildCounters) -> Node {
    let values = data.iter().map(|&i| tree.dataset.value(i));
    let stats = NodeStats::from_values(values);
    counters.nodes_built += 1;
    counters.leaves_built += 1;
    counters.stats_from_scratch += 1;
    counters.objects_scanned += data.len() as u64;
    let interval = Interval::closed(tree.dataset.value(data[0]), tree.dataset.value(data[data.len() - 1]));
    leaf_node(interval, data, stats)
}

pub(crate) fn leaf_node(interval: Interval, data: Vec<u32>, stats: NodeStats) -> Node {
    Node { id: NodeId(0), interval, height: 0, pos: 0, parent: None, children: Vec::new(), data, stats }
}

/// Internal node over `children` (non-empty, in order) with merged statistics.
pub(crate) fn parent_of(tree: &mut HETree, children: Vec<NodeId>, height: u32) -> NodeId {
    let first = tree.node(children[0]).interval;
    let last = tree.node(children[children.len() - 1]).interval;
    let stats = NodeStats::merge(children.iter().map(|&c| &tree.node(c).stats));
    let node = Node {
        id: NodeId(0),
        interval: Interval::hull(&first, &last),
        height,
        pos: 0,
        parent: None,
        children: children.clone(),
        data: Vec::new(),
        stats,
    };
    let id = tree.alloc(node);
    for c in children {
        tree.node_mut(c).parent = Some(id);
    }
    id
}

/// Groups `d` consecutive nodes per parent, level by level, until one root remains.
/// A single input node still receives a parent. Returns the root.
pub fn constr_internal_nodes(tree: &mut HETree, level: Vec<NodeId>, d: usize) -> NodeId {
    assert!(!level.is_empty(), "cannot group an empty level");
    let mut level = level;
    loop {
        let height = tree.node(level[0]).height + 1;
        let parents: Vec<NodeId> = level
            .chunks(d)
            .map(|group| parent_of(tree, group.to_vec(), height))
            .collect();
        if parents.len() == 1 {
            return parents[0];
        }
        level = parents;
    }
}
