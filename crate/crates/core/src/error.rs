use std::fmt;

use thiserror::Error;

use crate::tree::NodeId;

/// Errors surfaced by parsing, construction, exploration and adaptation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dataset is empty: {0}")]
    EmptyDataset(String),
    #[error("predicate {predicate} mixes numeric and temporal values")]
    MixedKinds { predicate: String },
    #[error("input error: {0}")]
    Input(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("dataset must be sorted before construction")]
    Unsorted,
    #[error("all values are equal; a fixed-range tree needs at least two distinct values (use the content variant)")]
    DegenerateRange,
    #[error("no candidate tree setting exists")]
    NoCandidate,
    #[error("resource {0} not found in dataset")]
    ResourceNotFound(String),
    #[error("range [{lower}, {upper}] does not intersect the data range")]
    EmptyRange { lower: f64, upper: f64 },
    #[error("node {0} is not currently rendered")]
    StaleOperation(NodeId),
    #[error("cannot drill below data objects")]
    DrillBelowObjects,
    #[error("already at the top of the tree")]
    TopOfTree,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("adaptation changes nothing")]
    NoChange,
    #[error("adaptation unsupported: {0}")]
    Unsupported(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Short machine-readable category used by the HTTP layer and the CLI.
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::EmptyDataset(_) | Error::MixedKinds { .. } | Error::Input(_) => ErrorKind::Data,
            Error::ResourceNotFound(_) | Error::UnknownNode(_) => ErrorKind::NotFound,
            Error::Invariant(_) => ErrorKind::Internal,
            _ => ErrorKind::InvalidRequest,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Data,
    NotFound,
    InvalidRequest,
    Internal,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Data => "data",
            ErrorKind::NotFound => "not_found",
            ErrorKind::InvalidRequest => "invalid_request",
            ErrorKind::Internal => "internal",
        })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
