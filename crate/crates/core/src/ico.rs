//! Incremental construction: build only what is rendered plus everything one operation away.
//!
//! Slots `(height, pos)` follow the positional layout of a full build, so every built node
//! has an exact full-build counterpart. After each render:
//! - a rendered node group whose parent is missing (and which is not the root) gets its
//!   parent, aggregated from the group, plus the parent's siblings;
//! - rendered internal nodes without children get their children;
//! - rendered objects build nothing.
//!
//! Range-variant nodes are built only when non-empty. Objects not yet inside any built node
//! sit in a session-local pool; internal nodes hold their objects until their children exist.

use std::ops::Range;
use std::sync::Arc;

use crate::counters::BuildCounters;
use crate::data::{object_order, sort_dataset, DataObject, Dataset, SharedDataset};
use crate::error::{Error, Result};
use crate::explore::{find_resource, Rendered, StartRequest, StartingPoint};
use crate::interval::Interval;
use crate::stats::NodeStats;
use crate::tree::layout::{ContentLayout, Grouping, RangeFrame};
use crate::tree::{BuildMode, HETree, Node, NodeId, TreeParams, Variant};

#[derive(Debug, Clone)]
enum Source {
    Content(ContentLayout),
    Range { frame: RangeFrame, pool: Vec<u32> },
}

#[derive(Debug, Clone, Copy)]
enum Origin {
    Pool,
    Node(NodeId),
}

/// A partial tree together with what is needed to extend it.
#[derive(Debug, Clone)]
pub struct IcoState {
    tree: HETree,
    grouping: Grouping,
    source: Source,
    counters: BuildCounters,
}

impl IcoState {
    /// Prepares an empty partial tree. The content variant sorts the dataset once here.
    pub fn new(dataset: SharedDataset, params: TreeParams) -> Result<Self> {
        params.validate(dataset.len())?;
        let (dataset, source, frame) = match params.variant {
            Variant::C => {
                let sorted = if dataset.is_sorted() {
                    dataset
                } else {
                    Arc::new(sort_dataset(Dataset::clone(&dataset)))
                };
                let layout = ContentLayout::new(sorted.len(), params.leaves);
                (sorted, Source::Content(layout), None)
            }
            Variant::R => {
                let (lo, hi) = (dataset.minv().unwrap_or(0.0), dataset.maxv().unwrap_or(0.0));
                if lo >= hi {
                    return Err(Error::DegenerateRange);
                }
                let frame = RangeFrame::new(lo, hi, params.leaves);
                let pool = (0..dataset.len() as u32).collect();
                (dataset, Source::Range { frame, pool }, Some(frame))
            }
        };
        Ok(Self {
            tree: HETree::empty(params, dataset, BuildMode::Incremental, frame),
            grouping: params.grouping(),
            source,
            counters: BuildCounters::default(),
        })
    }

    pub fn tree(&self) -> &HETree {
        &self.tree
    }

    pub fn counters(&self) -> BuildCounters {
        self.counters
    }

    pub fn grouping(&self) -> Grouping {
        self.grouping
    }

    /// Objects not yet enclosed by any built node (range variant).
    pub fn pool_len(&self) -> usize {
        match &self.source {
            Source::Range { pool, .. } => pool.len(),
            Source::Content(_) => 0,
        }
    }

    /// Builds the initial nodes for a start request and returns the first rendering.
    pub fn init(&mut self, req: &StartRequest, start: &StartingPoint) -> Result<Rendered> {
        let top = self.grouping.height();
        let rendered = match req {
            StartRequest::Bsc => {
                let root = self.build_block(top, 0..1, Origin::Pool, None);
                Rendered::Nodes { nodes: root }
            }
            StartRequest::Res { resource } => {
                let ds = self.tree.dataset.clone();
                let object = find_resource(&ds, resource).ok_or_else(|| Error::ResourceNotFound(resource.clone()))?;
                let leaf = match &self.source {
                    Source::Content(layout) => layout.leaf_of(object as usize),
                    Source::Range { frame, .. } => frame.leaf_of(ds.value(object)),
                };
                let block = self.grouping.sibling_block(0, leaf);
                self.build_block(0, block, Origin::Pool, None);
                let leaf = self.tree.slot(0, leaf as u32).ok_or_else(|| Error::Invariant("leaf of interest not built".into()))?;
                Rendered::Objects { leaf }
            }
            StartRequest::Ran { .. } => {
                let (h, pos) = self.covering_slot(&start.interval, top);
                let children = self.grouping.children(h, pos);
                let nodes = self.build_block(h - 1, children, Origin::Pool, None);
                Rendered::Nodes { nodes }
            }
        };
        self.after_render(&rendered)?;
        Ok(rendered)
    }

    /// Deepest non-empty internal slot whose interval contains U, scanning heights upward.
    fn covering_slot(&mut self, u: &Interval, top: u32) -> (u32, usize) {
        let counts = self.leaf_prefix_counts();
        for h in 1..top {
            for pos in 0..self.grouping.count(h) {
                let span = self.grouping.leaf_span(h, pos);
                let non_empty = counts.as_ref().is_none_or(|c| c[span.end] > c[span.start]);
                if non_empty && self.slot_interval(h, pos).covers(u) {
                    return (h, pos);
                }
            }
        }
        (top, 0)
    }

    /// Prefix sums of per-leaf object counts (range variant only).
    fn leaf_prefix_counts(&mut self) -> Option<Vec<usize>> {
        let Source::Range { frame, pool } = &self.source else {
            return None;
        };
        let mut prefix = vec![0usize; frame.leaves + 1];
        for &i in pool {
            prefix[frame.leaf_of(self.tree.dataset.value(i)) + 1] += 1;
        }
        for j in 0..frame.leaves {
            prefix[j + 1] += prefix[j];
        }
        self.counters.objects_scanned += pool.len() as u64;
        Some(prefix)
    }

    /// Interval a full build would give slot `(h, pos)`.
    pub fn slot_interval(&self, h: u32, pos: usize) -> Interval {
        let leaves = self.grouping.leaf_span(h, pos);
        match &self.source {
            Source::Content(layout) => {
                let r = layout.span(leaves);
                Interval::closed(self.tree.dataset.value(r.start as u32), self.tree.dataset.value(r.end as u32 - 1))
            }
            Source::Range { frame, .. } => frame.span(leaves),
        }
    }

    /// Applies the construction rules for a new rendering.
    pub fn after_render(&mut self, rendered: &Rendered) -> Result<()> {
        let Rendered::Nodes { nodes } = rendered else {
            return Ok(());
        };
        let first = self.tree.node(nodes[0]);
        let (h, pos) = (first.height, first.pos as usize);
        let top = self.grouping.height();
        if h < top && first.parent.is_none() {
            self.build_parent(h, pos, nodes.clone())?;
        }
        for &id in nodes {
            let n = self.tree.node(id);
            if !n.is_leaf() && n.children.is_empty() {
                let block = self.grouping.children(n.height, n.pos as usize);
                self.build_block(n.height - 1, block, Origin::Node(id), None);
            }
        }
        Ok(())
    }

    /// Parent of the group at `(h, pos)` from the group itself, plus the parent's siblings.
    fn build_parent(&mut self, h: u32, pos: usize, group: Vec<NodeId>) -> Result<()> {
        let ppos = pos / self.grouping.degree;
        if h + 1 == self.grouping.height() {
            self.build_block(h + 1, 0..1, Origin::Pool, Some((0, group)));
            return Ok(());
        }
        let gpos = ppos / self.grouping.degree;
        let origin = match self.tree.slot(h + 2, gpos as u32) {
            Some(gp) if !self.tree.node(gp).children.is_empty() => {
                return Err(Error::Invariant(format!("node {gp} has children but lacks one at height {}", h + 1)))
            }
            Some(gp) => Origin::Node(gp),
            None => Origin::Pool,
        };
        let block = self.grouping.children(h + 2, gpos);
        self.build_block(h + 1, block, origin, Some((ppos, group)));
        Ok(())
    }

    /// Builds the non-empty slots of `block` at height `h`. `known` supplies one slot
    /// whose children already exist; it is aggregated rather than computed.
    fn build_block(
        &mut self,
        h: u32,
        block: Range<usize>,
        origin: Origin,
        known: Option<(usize, Vec<NodeId>)>,
    ) -> Vec<NodeId> {
        let contents = self.collect_block(h, block.clone(), origin);
        let mut built = Vec::new();
        for (k, data) in contents.into_iter().enumerate() {
            let pos = block.start + k;
            let node = match &known {
                Some((kp, children)) if *kp == pos => self.aggregated(h, pos, children),
                _ => match self.scratch(h, pos, data) {
                    Some(n) => n,
                    None => continue,
                },
            };
            let children = node.children.clone();
            let id = self.tree.alloc(node);
            for c in children {
                self.tree.node_mut(c).parent = Some(id);
            }
            if let Origin::Node(p) = origin {
                self.tree.node_mut(id).parent = Some(p);
            }
            self.tree.index_node(id);
            if h == self.grouping.height() {
                self.tree.root = Some(id);
            }
            built.push(id);
        }
        if let Origin::Node(p) = origin {
            self.tree.node_mut(p).children = built.clone();
        }
        built
    }

    /// Per-slot contents of `block`: object indices (range) or one index range (content).
    fn collect_block(&mut self, h: u32, block: Range<usize>, origin: Origin) -> Vec<SlotData> {
        match &mut self.source {
            Source::Content(layout) => block
                .map(|pos| SlotData::Span(layout.span(self.grouping.leaf_span(h, pos))))
                .collect(),
            Source::Range { frame, pool } => {
                let objects = match origin {
                    Origin::Pool => std::mem::take(pool),
                    Origin::Node(p) => std::mem::take(&mut self.tree.node_mut(p).data),
                };
                self.counters.objects_scanned += objects.len() as u64;
                let width = self.grouping.span_width(h);
                let mut buckets = vec![Vec::new(); block.len()];
                let mut rest = Vec::new();
                for i in objects {
                    let slot = frame.leaf_of(self.tree.dataset.value(i)) / width;
                    if block.contains(&slot) {
                        buckets[slot - block.start].push(i);
                    } else {
                        rest.push(i);
                    }
                }
                match origin {
                    Origin::Pool => *pool = rest,
                    Origin::Node(p) => debug_assert!(rest.is_empty(), "node {p} held objects outside its children"),
                }
                buckets.into_iter().map(SlotData::Objects).collect()
            }
        }
    }

    fn scratch(&mut self, h: u32, pos: usize, data: SlotData) -> Option<Node> {
        let ds = self.tree.dataset.clone();
        let mut objects = match data {
            SlotData::Span(r) => {
                let stats = NodeStats::from_values(r.clone().map(|i| ds.value(i as u32)));
                self.counters.objects_scanned += r.len() as u64;
                let data = if h == 0 { r.map(|i| i as u32).collect() } else { Vec::new() };
                return Some(self.finish_scratch(h, pos, data, stats));
            }
            SlotData::Objects(objects) => objects,
        };
        if objects.is_empty() {
            return None;
        }
        let stats = NodeStats::from_values(objects.iter().map(|&i| ds.value(i)));
        if h == 0 {
            objects.sort_by(|&a, &b| object_order(ds.get(a), ds.get(b)));
        }
        Some(self.finish_scratch(h, pos, objects, stats))
    }

    fn finish_scratch(&mut self, h: u32, pos: usize, data: Vec<u32>, stats: NodeStats) -> Node {
        self.counters.nodes_built += 1;
        self.counters.stats_from_scratch += 1;
        if h == 0 {
            self.counters.leaves_built += 1;
        }
        Node {
            id: NodeId(0),
            interval: self.slot_interval(h, pos),
            height: h,
            pos: pos as u32,
            parent: None,
            children: Vec::new(),
            data,
            stats,
        }
    }

    fn aggregated(&mut self, h: u32, pos: usize, children: &[NodeId]) -> Node {
        self.counters.nodes_built += 1;
        self.counters.stats_aggregated += 1;
        Node {
            id: NodeId(0),
            interval: self.slot_interval(h, pos),
            height: h,
            pos: pos as u32,
            parent: None,
            children: children.to_vec(),
            data: Vec::new(),
            stats: NodeStats::merge(children.iter().map(|&c| &self.tree.node(c).stats)),
        }
    }
}

enum SlotData {
    Span(Range<usize>),
    Objects(Vec<u32>),
}

/// Consecutive intervals of length `len` from `low`, at most `n`, the last truncated at
/// and closed on `up`.
pub fn compute_sibling_intervals(low: f64, up: f64, len: f64, n: usize) -> Vec<Interval> {
    let mut out = Vec::new();
    for i in 0..n {
        let lower = low + i as f64 * len;
        if i > 0 && lower >= up {
            break;
        }
        let upper = lower + len;
        if upper >= up {
            out.push(Interval::closed(lower, up));
            break;
        }
        out.push(Interval::half_open(lower, upper));
    }
    out
}

/// A node produced by [`constr_sibling_nodes`].
#[derive(Debug, Clone, PartialEq)]
pub struct SiblingNode {
    pub interval: Interval,
    pub data: Vec<DataObject>,
    pub stats: NodeStats,
}

/// Distributes `available` over equal-length `intervals` by the floor formula, removing
/// consumed objects. Only non-empty intervals yield nodes; leaves (`h == 0`) sort their data.
pub fn constr_sibling_nodes(intervals: &[Interval], available: &mut Vec<DataObject>, h: u32) -> Vec<SiblingNode> {
    let (Some(first), Some(last)) = (intervals.first(), intervals.last()) else {
        return Vec::new();
    };
    let len = first.length();
    let span = Interval::hull(first, last);
    let mut buckets: Vec<Vec<DataObject>> = vec![Vec::new(); intervals.len()];
    let mut rest = Vec::new();
    for o in available.drain(..) {
        if !span.contains(o.value) {
            rest.push(o);
            continue;
        }
        let j = (((o.value - first.lower) / len).floor().max(0.0) as usize).min(intervals.len() - 1);
        buckets[j].push(o);
    }
    *available = rest;
    intervals
        .iter()
        .zip(buckets)
        .filter(|(_, b)| !b.is_empty())
        .map(|(interval, mut data)| {
            if h == 0 {
                data.sort_by(object_order);
            }
            let stats = NodeStats::from_values(data.iter().map(|o| o.value));
            SiblingNode { interval: *interval, data, stats }
        })
        .collect()
}
