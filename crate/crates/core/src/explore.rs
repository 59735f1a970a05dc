//! Exploration sessions: scenario start, drill-down, roll-up and view documents.
//!
//! Rendering always shows one maximal sibling group, the root alone, or the objects of one leaf.

use serde::{Deserialize, Serialize};

use crate::ada::{self, AdaptTarget, AdaptationReport};
use crate::counters::BuildCounters;
use crate::data::{object_order, Dataset, SharedDataset};
use crate::error::{Error, Result};
use crate::ico::IcoState;
use crate::interval::Interval;
use crate::stats::NodeStats;
use crate::tree::{HETree, NodeId, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Basic: start from the whole range.
    Bsc,
    /// Resource: start from the leaf holding one subject.
    Res,
    /// Range: start from the nodes covering a value range.
    Ran,
}

/// How a session starts, as requested by a caller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "lowercase")]
pub enum StartRequest {
    Bsc,
    Res { resource: String },
    Ran { lower: f64, upper: f64 },
}

impl StartRequest {
    pub fn scenario(&self) -> Scenario {
        match self {
            StartRequest::Bsc => Scenario::Bsc,
            StartRequest::Res { .. } => Scenario::Res,
            StartRequest::Ran { .. } => Scenario::Ran,
        }
    }
}

/// Resolved start: the interval of interest U and, for resources, the chosen object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StartingPoint {
    pub scenario: Scenario,
    pub interval: Interval,
    pub resource: Option<String>,
}

/// Object of `subject` that sorts first; subjects may carry several values.
pub fn find_resource(dataset: &Dataset, subject: &str) -> Option<u32> {
    (0..dataset.len() as u32)
        .filter(|&i| &*dataset.get(i).subject == subject)
        .min_by(|&a, &b| object_order(dataset.get(a), dataset.get(b)))
}

pub fn starting_point(dataset: &Dataset, req: &StartRequest) -> Result<StartingPoint> {
    let (minv, maxv) = match (dataset.minv(), dataset.maxv()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::EmptyDataset("cannot explore an empty dataset".into())),
    };
    let (interval, resource) = match req {
        StartRequest::Bsc => (Interval::closed(minv, maxv), None),
        StartRequest::Res { resource } => {
            let i = find_resource(dataset, resource).ok_or_else(|| Error::ResourceNotFound(resource.clone()))?;
            (Interval::point(dataset.value(i)), Some(resource.clone()))
        }
        StartRequest::Ran { lower, upper } => {
            let (lo, hi) = (minv.max(*lower), maxv.min(*upper));
            if !(lo <= hi) {
                return Err(Error::EmptyRange { lower: *lower, upper: *upper });
            }
            (Interval::closed(lo, hi), None)
        }
    };
    Ok(StartingPoint { scenario: req.scenario(), interval, resource })
}

/// What is on screen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Rendered {
    /// One sibling group at a single height, or the root alone.
    Nodes { nodes: Vec<NodeId> },
    /// The sorted objects of one leaf.
    Objects { leaf: NodeId },
}

impl Rendered {
    pub fn nodes(&self) -> &[NodeId] {
        match self {
            Rendered::Nodes { nodes } => nodes,
            Rendered::Objects { .. } => &[],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Operation {
    Start,
    /// `height` and `pos` locate the node independently of construction order.
    DrillDown { node: NodeId, height: u32, pos: u32 },
    RollUp,
    Adapt { degree: usize, leaves: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub operation: Operation,
    pub rendered: Rendered,
    /// Construction performed by this step.
    pub built: BuildCounters,
}

/// Deepest non-empty internal node whose interval contains U; the root if none below it does.
pub fn covering_node(tree: &HETree, u: &Interval) -> Option<NodeId> {
    for level in tree.levels().iter().skip(1) {
        for &id in level {
            let n = tree.node(id);
            if !n.stats.is_empty() && n.interval.covers(u) {
                return Some(id);
            }
        }
    }
    tree.root()
}

/// Leaf of a full tree holding object `object` of the tree's dataset.
fn leaf_holding(tree: &HETree, object: u32) -> Option<NodeId> {
    let v = tree.dataset().value(object);
    tree.leaves().iter().copied().find(|&l| {
        let n = tree.node(l);
        n.interval.contains(v) && n.data.contains(&object)
    })
}

/// Rendering after drilling into `node`.
pub fn drill_target(tree: &HETree, cur: &Rendered, node: NodeId) -> Result<Rendered> {
    let nodes = match cur {
        Rendered::Objects { .. } => return Err(Error::DrillBelowObjects),
        Rendered::Nodes { nodes } => nodes,
    };
    if !nodes.contains(&node) {
        return Err(Error::StaleOperation(node));
    }
    let n = tree.node(node);
    if n.is_leaf() {
        return Ok(Rendered::Objects { leaf: node });
    }
    if n.children.is_empty() {
        return Err(Error::Invariant(format!("children of rendered node {node} were not constructed")));
    }
    Ok(Rendered::Nodes { nodes: n.children.clone() })
}

/// Rendering after rolling up from `cur`.
pub fn roll_target(tree: &HETree, cur: &Rendered) -> Result<Rendered> {
    match cur {
        Rendered::Objects { leaf } => Ok(Rendered::Nodes { nodes: tree.sibling_group(*leaf) }),
        Rendered::Nodes { nodes } => {
            let first = nodes[0];
            if nodes.len() == 1 && Some(first) == tree.root() {
                return Err(Error::TopOfTree);
            }
            let parent = tree.node(first).parent.ok_or_else(|| {
                Error::Invariant(format!("parent of rendered node {first} was not constructed"))
            })?;
            Ok(Rendered::Nodes { nodes: tree.sibling_group(parent) })
        }
    }
}

/// Operations a user could issue next, for safety simulation.
pub fn legal_operations(tree: &HETree, cur: &Rendered) -> Vec<Operation> {
    match cur {
        Rendered::Objects { .. } => vec![Operation::RollUp],
        Rendered::Nodes { nodes } => {
            let mut ops: Vec<Operation> = nodes
                .iter()
                .map(|&id| {
                    let n = tree.node(id);
                    Operation::DrillDown { node: id, height: n.height, pos: n.pos }
                })
                .collect();
            if !(nodes.len() == 1 && Some(nodes[0]) == tree.root()) {
                ops.push(Operation::RollUp);
            }
            ops
        }
    }
}

#[derive(Debug, Clone)]
enum Engine {
    Full { tree: HETree, counters: BuildCounters },
    Incremental(Box<IcoState>),
}

/// A single user's navigation over a full or incrementally built tree.
#[derive(Debug, Clone)]
pub struct ExplorationSession {
    engine: Engine,
    start: StartingPoint,
    cur: Rendered,
    history: Vec<HistoryEntry>,
}

impl ExplorationSession {
    /// Starts over an already built full tree. `counters` are those of its construction.
    pub fn full(tree: HETree, counters: BuildCounters, req: &StartRequest) -> Result<Self> {
        let start = starting_point(tree.dataset(), req)?;
        let root = tree.root().ok_or_else(|| Error::Invariant("full tree without root".into()))?;
        let cur = match req {
            StartRequest::Bsc => Rendered::Nodes { nodes: vec![root] },
            StartRequest::Res { resource } => {
                let object = find_resource(tree.dataset(), resource)
                    .ok_or_else(|| Error::ResourceNotFound(resource.clone()))?;
                let leaf = leaf_holding(&tree, object)
                    .ok_or_else(|| Error::Invariant(format!("no leaf holds resource {resource}")))?;
                Rendered::Objects { leaf }
            }
            StartRequest::Ran { .. } => {
                let c = covering_node(&tree, &start.interval).unwrap_or(root);
                Rendered::Nodes { nodes: tree.node(c).children.clone() }
            }
        };
        let history = vec![HistoryEntry { operation: Operation::Start, rendered: cur.clone(), built: counters }];
        Ok(Self { engine: Engine::Full { tree, counters }, start, cur, history })
    }

    /// Starts with incremental construction; only the initial nodes are built.
    pub fn incremental(dataset: SharedDataset, params: TreeParams, req: &StartRequest) -> Result<Self> {
        let start = starting_point(&dataset, req)?;
        let mut ico = IcoState::new(dataset, params)?;
        let cur = ico.init(req, &start)?;
        let history = vec![HistoryEntry { operation: Operation::Start, rendered: cur.clone(), built: ico.counters() }];
        Ok(Self { engine: Engine::Incremental(Box::new(ico)), start, cur, history })
    }

    pub fn tree(&self) -> &HETree {
        match &self.engine {
            Engine::Full { tree, .. } => tree,
            Engine::Incremental(ico) => ico.tree(),
        }
    }

    pub fn is_incremental(&self) -> bool {
        matches!(self.engine, Engine::Incremental(_))
    }

    pub fn ico(&self) -> Option<&IcoState> {
        match &self.engine {
            Engine::Incremental(ico) => Some(ico),
            Engine::Full { .. } => None,
        }
    }

    pub fn start(&self) -> &StartingPoint {
        &self.start
    }

    pub fn current(&self) -> &Rendered {
        &self.cur
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn counters(&self) -> BuildCounters {
        match &self.engine {
            Engine::Full { counters, .. } => *counters,
            Engine::Incremental(ico) => ico.counters(),
        }
    }

    pub fn drill_down(&mut self, node: NodeId) -> Result<&Rendered> {
        let next = drill_target(self.tree(), &self.cur, node)?;
        let n = self.tree().node(node);
        let op = Operation::DrillDown { node, height: n.height, pos: n.pos };
        self.apply(op, next)
    }

    pub fn roll_up(&mut self) -> Result<&Rendered> {
        let next = roll_target(self.tree(), &self.cur)?;
        self.apply(Operation::RollUp, next)
    }

    /// Drills into the `k`-th rendered node (0-based).
    pub fn drill_nth(&mut self, k: usize) -> Result<&Rendered> {
        let node = match &self.cur {
            Rendered::Objects { .. } => return Err(Error::DrillBelowObjects),
            Rendered::Nodes { nodes } => *nodes
                .get(k)
                .ok_or_else(|| Error::InvalidParams(format!("only {} nodes are rendered", nodes.len())))?,
        };
        self.drill_down(node)
    }

    fn apply(&mut self, op: Operation, next: Rendered) -> Result<&Rendered> {
        let before = self.counters();
        if let Engine::Incremental(ico) = &mut self.engine {
            ico.after_render(&next)?;
        }
        let built = self.counters() - before;
        self.history.push(HistoryEntry { operation: op, rendered: next.clone(), built });
        self.cur = next;
        Ok(&self.cur)
    }

    pub fn legal_operations(&self) -> Vec<Operation> {
        legal_operations(self.tree(), &self.cur)
    }

    /// Adapts the tree to a new degree or leaf count. Needs a full tree.
    ///
    /// Afterwards the children of the reconstruction root are rendered.
    pub fn adapt(&mut self, target: AdaptTarget, root: Option<NodeId>) -> Result<AdaptationReport> {
        let Engine::Full { tree, counters } = &mut self.engine else {
            return Err(Error::Unsupported("adaptation needs a fully built tree".into()));
        };
        let (new_root, report) = ada::adapt(tree, root, target)?;
        *counters += report.counters();
        let cur = Rendered::Nodes { nodes: tree.node(new_root).children.clone() };
        let p = tree.params();
        let op = Operation::Adapt { degree: p.degree, leaves: p.leaves };
        self.history.push(HistoryEntry { operation: op, rendered: cur.clone(), built: report.counters() });
        self.cur = cur;
        Ok(report)
    }

    pub fn view(&self) -> ViewDocument {
        ViewDocument::new(self.tree(), &self.cur, self.counters())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ViewElement {
    Node { id: NodeId, height: u32, interval: Interval, stats: NodeStats },
    Object { subject: String, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewKind {
    Nodes,
    Objects,
}

/// Snapshot of the rendered level for clients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewDocument {
    pub kind: ViewKind,
    pub elements: Vec<ViewElement>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub focus_leaf: Option<NodeId>,
    /// Intervals from the highest built ancestor down to the focus.
    pub breadcrumb: Vec<Interval>,
    pub counters: BuildCounters,
}

impl ViewDocument {
    pub fn new(tree: &HETree, cur: &Rendered, counters: BuildCounters) -> Self {
        let ds = tree.dataset();
        match cur {
            Rendered::Objects { leaf } => ViewDocument {
                kind: ViewKind::Objects,
                elements: tree
                    .node(*leaf)
                    .data
                    .iter()
                    .map(|&i| ViewElement::Object { subject: ds.get(i).subject.to_string(), value: ds.value(i) })
                    .collect(),
                focus_leaf: Some(*leaf),
                breadcrumb: breadcrumb(tree, *leaf),
                counters,
            },
            Rendered::Nodes { nodes } => {
                let focus = tree.node(nodes[0]).parent.unwrap_or(nodes[0]);
                ViewDocument {
                    kind: ViewKind::Nodes,
                    elements: nodes
                        .iter()
                        .map(|&id| {
                            let n = tree.node(id);
                            ViewElement::Node { id, height: n.height, interval: n.interval, stats: n.stats }
                        })
                        .collect(),
                    focus_leaf: None,
                    breadcrumb: breadcrumb(tree, focus),
                    counters,
                }
            }
        }
    }
}

fn breadcrumb(tree: &HETree, id: NodeId) -> Vec<Interval> {
    tree.path_to(id).into_iter().map(|n| tree.node(n).interval).collect()
}
