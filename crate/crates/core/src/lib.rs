//! Hierarchical exploration trees over numeric and temporal data.
//!
//! Flat `(subject, predicate, value)` data is grouped into a balanced d-ary tree whose
//! leaves hold either equal counts of sorted objects ([`Variant::C`]) or equal-width
//! value ranges ([`Variant::R`]). Each node carries count, mean, variance and extremes.
//! Trees can be built in full, built incrementally as a session navigates ([`ico`]),
//! and adapted in place to a new degree or leaf count ([`ada`]).

pub mod ada;
pub mod counters;
pub mod data;
pub mod error;
pub mod explore;
pub mod ico;
pub mod ingest;
pub mod interval;
pub mod params;
pub mod stats;
pub mod tree;

pub use ada::{adapt, classify, AdaptTarget, AdaptationCase, AdaptationReport};
pub use counters::BuildCounters;
pub use data::{sort_dataset, DataObject, Dataset, ScalarValue, SharedDataset, ValueKind};
pub use error::{Error, ErrorKind, Result};
pub use explore::{ExplorationSession, Rendered, Scenario, StartRequest, ViewDocument};
pub use ico::IcoState;
pub use interval::Interval;
pub use params::{estimate_params, EstimateOptions, HeightPreference, VisBounds};
pub use stats::NodeStats;
pub use tree::{build_hetree_c, build_hetree_r, build_tree, BuildMode, HETree, Node, NodeId, TreeParams, Variant};
