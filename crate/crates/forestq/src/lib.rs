//! Command-line front end and experiment harness for `forestq-core`.

pub mod commands;
pub mod config;
pub mod io;
pub mod parallel;
pub mod stats;
pub mod synth;

pub use config::RunConfig;
pub use forestq_core as core;
pub use io::{load_graph, parse_update_stream, LoadedGraph, Mode};
