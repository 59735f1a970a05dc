//! The HETree: an arena of nodes, per-height level index, and construction parameters.

pub(crate) mod build;
mod check;
pub use self::check::{compare_subtrees, compare_trees};
mod json;
pub mod layout;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use self::build::{build_hetree_c, build_hetree_r, build_tree, constr_internal_nodes};
pub(crate) use self::build::{build_c_over, build_r_over};
pub use self::json::{NodeDocument, ParamsDocument, TreeDocument, TREE_SCHEMA};
use self::layout::{ContentLayout, Grouping, RangeFrame};
use crate::data::SharedDataset;
use crate::interval::Interval;
use crate::stats::NodeStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Content-based (equal count) or range-based (equal width) leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    C,
    R,
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "C" => Ok(Variant::C),
            "R" => Ok(Variant::R),
            other => Err(format!("unknown variant {other:?} (expected C or R)")),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::C => "C",
            Variant::R => "R",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuildMode {
    Full,
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeParams {
    pub variant: Variant,
    pub leaves: usize,
    pub degree: usize,
}

impl TreeParams {
    pub fn new(variant: Variant, leaves: usize, degree: usize) -> Self {
        Self { variant, leaves, degree }
    }

    /// λ = ⌈n/ℓ⌉ (content variant).
    pub fn lambda(&self, n: usize) -> usize {
        n.div_ceil(self.leaves)
    }

    /// ρ = (maxv − minv)/ℓ (range variant).
    pub fn rho(&self, minv: f64, maxv: f64) -> f64 {
        (maxv - minv) / self.leaves as f64
    }

    pub fn grouping(&self) -> Grouping {
        Grouping::new(self.leaves, self.degree)
    }

    pub(crate) fn validate(&self, n: usize) -> crate::Result<()> {
        use crate::Error::InvalidParams;
        if self.leaves == 0 {
            return Err(InvalidParams("leaf count must be positive".into()));
        }
        if self.degree < 2 {
            return Err(InvalidParams("degree must be at least 2".into()));
        }
        if n == 0 {
            return Err(crate::Error::EmptyDataset("cannot build over no objects".into()));
        }
        if self.variant == Variant::C && n < self.leaves {
            return Err(InvalidParams(format!("{} leaves exceed {} objects", self.leaves, n)));
        }
        if self.leaves > u32::MAX as usize {
            return Err(InvalidParams("leaf count too large".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub interval: Interval,
    pub height: u32,
    /// Index among the nodes of this height, in level order.
    pub pos: u32,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    /// Object indices into the tree's dataset, in sorted order. Leaves only once fully built.
    pub data: Vec<u32>,
    pub stats: NodeStats,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.height == 0
    }
}

#[derive(Debug, Clone)]
pub struct HETree {
    pub(crate) params: TreeParams,
    pub(crate) dataset: SharedDataset,
    pub(crate) nodes: Vec<Option<Node>>,
    pub(crate) root: Option<NodeId>,
    pub(crate) levels: Vec<Vec<NodeId>>,
    pub(crate) mode: BuildMode,
    pub(crate) frame: Option<RangeFrame>,
}

impl HETree {
    pub(crate) fn empty(params: TreeParams, dataset: SharedDataset, mode: BuildMode, frame: Option<RangeFrame>) -> Self {
        Self { params, dataset, nodes: Vec::new(), root: None, levels: Vec::new(), mode, frame }
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn dataset(&self) -> &SharedDataset {
        &self.dataset
    }

    pub fn mode(&self) -> BuildMode {
        self.mode
    }

    /// Range frame of a range-variant tree.
    pub fn frame(&self) -> Option<&RangeFrame> {
        self.frame.as_ref()
    }

    /// Leaf layout of a content-variant tree over its whole dataset.
    pub fn content_layout(&self) -> Option<ContentLayout> {
        (self.params.variant == Variant::C).then(|| ContentLayout::new(self.dataset.len(), self.params.leaves))
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        self.get(id).unwrap_or_else(|| panic!("node {id} does not exist"))
    }

    pub fn get(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.0 as usize).and_then(Option::as_ref)
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.get(id).is_some()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().flatten()
    }

    pub fn node_count(&self) -> usize {
        self.nodes().count()
    }

    /// `levels()[h]` lists the nodes at height `h` in level order.
    pub fn levels(&self) -> &[Vec<NodeId>] {
        &self.levels
    }

    pub fn leaves(&self) -> &[NodeId] {
        self.levels.first().map_or(&[], Vec::as_slice)
    }

    /// Height of the root, or of the highest built level.
    pub fn height(&self) -> u32 {
        self.levels.len().saturating_sub(1) as u32
    }

    pub fn internal_count(&self) -> usize {
        self.nodes().filter(|n| !n.is_leaf()).count()
    }

    /// Object indices enclosed by the subtree at `id`, in sorted order.
    pub fn contents(&self, id: NodeId) -> Vec<u32> {
        let mut out = Vec::new();
        self.collect_contents(id, &mut out);
        out
    }

    fn collect_contents(&self, id: NodeId, out: &mut Vec<u32>) {
        let n = self.node(id);
        out.extend_from_slice(&n.data);
        for &c in &n.children {
            self.collect_contents(c, out);
        }
    }

    pub fn values(&self, id: NodeId) -> Vec<f64> {
        self.contents(id).into_iter().map(|i| self.dataset.value(i)).collect()
    }

    /// Built node at `(height, pos)`.
    pub fn slot(&self, height: u32, pos: u32) -> Option<NodeId> {
        let level = self.levels.get(height as usize)?;
        level
            .binary_search_by_key(&pos, |&id| self.node(id).pos)
            .ok()
            .map(|i| level[i])
    }

    /// Maximal built sibling group containing `id`, in level order.
    pub fn sibling_group(&self, id: NodeId) -> Vec<NodeId> {
        let n = self.node(id);
        if let Some(p) = n.parent {
            return self.node(p).children.clone();
        }
        if Some(id) == self.root {
            return vec![id];
        }
        let block = self.params.grouping().sibling_block(n.height, n.pos as usize);
        self.levels[n.height as usize]
            .iter()
            .copied()
            .filter(|&s| block.contains(&(self.node(s).pos as usize)))
            .collect()
    }

    /// Ancestors from the root down to `id`, inclusive, following built parents only.
    pub fn path_to(&self, id: NodeId) -> Vec<NodeId> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.node(cur).parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    pub(crate) fn alloc(&mut self, mut node: Node) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        node.id = id;
        self.nodes.push(Some(node));
        id
    }

    pub(crate) fn node_mut(&mut self, id: NodeId) -> &mut Node {
        self.nodes[id.0 as usize].as_mut().unwrap_or_else(|| panic!("node {id} does not exist"))
    }

    pub(crate) fn remove(&mut self, id: NodeId) -> Node {
        self.nodes[id.0 as usize].take().unwrap_or_else(|| panic!("node {id} does not exist"))
    }

    /// Inserts a built node into its level, keeping level order by `pos`.
    pub(crate) fn index_node(&mut self, id: NodeId) {
        let (h, pos) = {
            let n = self.node(id);
            (n.height as usize, n.pos)
        };
        while self.levels.len() <= h {
            self.levels.push(Vec::new());
        }
        let nodes = &self.nodes;
        let key = |x: &NodeId| nodes[x.0 as usize].as_ref().map_or(0, |n| n.pos);
        let at = self.levels[h].partition_point(|x| key(x) < pos);
        self.levels[h].insert(at, id);
    }

    /// Recomputes heights, positions and levels from the root by depth-first traversal.
    pub(crate) fn reindex(&mut self) {
        let Some(root) = self.root else {
            self.levels.clear();
            return;
        };
        self.node_mut(root).parent = None;
        let mut order = Vec::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            order.push(id);
            let children = self.node(id).children.clone();
            for &c in children.iter().rev() {
                self.node_mut(c).parent = Some(id);
                stack.push(c);
            }
        }
        for &id in order.iter().rev() {
            let h = self.node(id).children.iter().map(|&c| self.node(c).height + 1).max().unwrap_or(0);
            self.node_mut(id).height = h;
        }
        let height = self.node(root).height as usize;
        self.levels = vec![Vec::new(); height + 1];
        for id in order {
            let h = self.node(id).height as usize;
            let pos = self.levels[h].len() as u32;
            self.node_mut(id).pos = pos;
            self.levels[h].push(id);
        }
    }
}
