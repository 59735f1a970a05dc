use serde::{Deserialize, Serialize};

use super::{BuildMode, HETree, NodeId, Variant};
use crate::data::ValueKind;
use crate::interval::Interval;
use crate::stats::NodeStats;

pub const TREE_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeDocument {
    pub schema: u32,
    pub params: ParamsDocument,
    pub mode: BuildMode,
    pub kind: ValueKind,
    pub predicate: String,
    pub size: usize,
    pub root: Option<NodeId>,
    pub height: u32,
    /// Top level first, each level left to right.
    pub nodes: Vec<NodeDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsDocument {
    pub variant: Variant,
    pub leaves: usize,
    pub degree: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub lambda: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeDocument {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub height: u32,
    pub interval: Interval,
    pub stats: NodeStats,
    pub children: Vec<NodeId>,
    /// Objects held directly (leaves).
    pub objects: usize,
}

impl HETree {
    pub fn to_document(&self) -> TreeDocument {
        let p = self.params;
        let params = ParamsDocument {
            variant: p.variant,
            leaves: p.leaves,
            degree: p.degree,
            lambda: (p.variant == Variant::C).then(|| p.lambda(self.dataset.len())),
            rho: self.frame.map(|f| f.rho()),
        };
        let nodes = self
            .levels
            .iter()
            .rev()
            .flatten()
            .map(|&id| {
                let n = self.node(id);
                NodeDocument {
                    id,
                    parent: n.parent,
                    height: n.height,
                    interval: n.interval,
                    stats: n.stats,
                    children: n.children.clone(),
                    objects: n.data.len(),
                }
            })
            .collect();
        TreeDocument {
            schema: TREE_SCHEMA,
            params,
            mode: self.mode,
            kind: self.dataset.kind(),
            predicate: self.dataset.predicate().to_owned(),
            size: self.dataset.len(),
            root: self.root,
            height: self.height(),
            nodes,
        }
    }
}
