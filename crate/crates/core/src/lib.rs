//! Entry estimation for the forest matrix `Ω = (I + L)⁻¹` of a directed graph.
//!
//! Entries are estimated from uniformly sampled spanning converging forests:
//! `ω_ij` is the probability that node `i` is rooted at `j` in a uniform
//! forest. The sample is kept uniform under edge insertions and deletions
//! without resampling, so updates and queries cost `O(l)` root lookups
//! regardless of graph size.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel batch sampling live in the `forestq` companion crate.
#![no_std]

extern crate alloc;

pub mod dynamic;
mod error;
pub mod estimators;
pub mod forest;
pub mod graph;
pub mod oracle;
pub mod sampler;

pub use dynamic::{
    apply_stream, delete_update, insert_update, prune, PruneConfig, UpdateEvent, UpdateKind,
    UpdateStats,
};
pub use error::{Error, Result};
pub use estimators::{
    forest_distance, required_samples, sfq_query, sfqplus_query, EntryEstimate, EstimatorParams,
    Method,
};
pub use forest::{Forest, ForestDefect, ForestList};
pub use graph::{Digraph, Edge, NodeId};
pub use sampler::{sample_forest, sample_forest_list, SamplerScratch, SeedStream};
