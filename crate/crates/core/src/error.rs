use alloc::boxed::Box;

use thiserror::Error;

use crate::forest::ForestDefect;
use crate::graph::{Edge, NodeId};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("edge exists: {0}")]
    EdgeExists(Edge),
    #[error("edge not found: {0}")]
    EdgeNotFound(Edge),
    #[error("node {node} out of range (n = {n})")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("no samples")]
    NoSamples,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("graph too large to enumerate (search space {0})")]
    TooLargeToEnumerate(u128),
    #[error("graph too large for a dense solve (n = {0})")]
    TooLargeForDense(usize),
    #[error("numeric failure: {0}")]
    Numeric(&'static str),
    #[error("corrupted forest: {0}")]
    Corrupted(ForestDefect),
    #[error("event {index}: {source}")]
    InvalidEvent { index: usize, source: Box<Error> },
}
