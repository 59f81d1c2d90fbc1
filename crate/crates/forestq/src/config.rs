use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context};
use forestq_core::{EstimatorParams, PruneConfig, SeedStream};

use crate::io::{load_graph_file, LoadedGraph, Mode};

/// Tags for the independent RNG families derived from the master seed.
const SAMPLE_TAG: u64 = 0x5a4d;
const PRUNE_TAG: u64 = 0x9e57;
const WORKLOAD_TAG: u64 = 0xb3c1;

/// Settings shared by every command.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub graph: Option<PathBuf>,
    pub mode: Mode,
    pub seed: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub prune_factor: f64,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            graph: None,
            mode: Mode::Directed,
            seed: 0,
            epsilon: 0.03,
            delta: 0.01,
            prune_factor: PruneConfig::DEFAULT_FACTOR,
            threads: 1,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> anyhow::Result<()> {
        EstimatorParams::new(self.epsilon, self.delta)?;
        PruneConfig::new(1, self.prune_factor)?;
        if self.threads == 0 {
            bail!("--threads must be at least 1");
        }
        Ok(())
    }

    pub fn params(&self) -> EstimatorParams {
        EstimatorParams::new(self.epsilon, self.delta).expect("validated config")
    }

    pub fn prune(&self, base: u64) -> PruneConfig {
        PruneConfig::new(base, self.prune_factor).expect("validated config")
    }

    pub fn sample_seeds(&self) -> SeedStream {
        SeedStream::new(self.seed).derive(SAMPLE_TAG)
    }

    pub fn prune_seeds(&self) -> SeedStream {
        SeedStream::new(self.seed).derive(PRUNE_TAG)
    }

    pub fn workload_seeds(&self) -> SeedStream {
        SeedStream::new(self.seed).derive(WORKLOAD_TAG)
    }

    pub fn load_graph(&self) -> anyhow::Result<LoadedGraph> {
        let path = self
            .graph
            .as_ref()
            .context("--graph is required for this command")?;
        load_graph_file(path, self.mode).with_context(|| format!("loading {}", path.display()))
    }

    /// `#`-prefixed lines identifying the run: the shared settings followed
    /// by the command-specific `extra` pairs.
    pub fn header(&self, command: &str, extra: &[(&str, String)]) -> String {
        let graph = self
            .graph
            .as_ref()
            .map_or_else(|| "-".to_string(), |p| p.display().to_string());
        let mut h = format!(
            "# forestq {} {command}\n# graph={graph} mode={} seed={} epsilon={} delta={} prune_factor={} threads={}\n",
            env!("CARGO_PKG_VERSION"),
            self.mode,
            self.seed,
            self.epsilon,
            self.delta,
            self.prune_factor,
            self.threads
        );
        if !extra.is_empty() {
            h.push('#');
            for (k, v) in extra {
                let _ = write!(h, " {k}={v}");
            }
            h.push('\n');
        }
        h
    }
}
