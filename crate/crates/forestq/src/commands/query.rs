use std::io::Write;
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context};
use forestq_core::estimators::query;
use forestq_core::oracle::forest_matrix_column;
use forestq_core::{required_samples, Method, NodeId};

use crate::config::RunConfig;
use crate::io::LoadedGraph;
use crate::parallel::{build_pool, sample_list};

/// Residual tolerance of the exact column solve.
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct QueryArgs {
    pub i: u64,
    pub j: u64,
    /// `None` runs both estimators on the same list.
    pub method: Option<Method>,
    pub samples: Option<u64>,
    pub exact: bool,
}

#[derive(Clone, Debug)]
pub struct QueryResult {
    pub method: Method,
    pub estimate: f64,
    pub samples: u64,
    pub wall: Duration,
    pub exact: Option<f64>,
}

pub fn run_query(
    cfg: &RunConfig,
    g: &LoadedGraph,
    args: &QueryArgs,
    out: &mut dyn Write,
) -> anyhow::Result<Vec<QueryResult>> {
    let node = |label| {
        g.node(label)
            .ok_or_else(|| anyhow!("node {label} not in graph ({} nodes)", g.graph.node_count()))
    };
    let (i, j) = (node(args.i)?, node(args.j)?);
    let l = args
        .samples
        .unwrap_or_else(|| required_samples(&cfg.params(), g.graph.out_degree(j), i == j));
    anyhow::ensure!(l >= 1, "--samples must be positive");
    let pool = build_pool(cfg.threads)?;

    let start = Instant::now();
    let list = sample_list(&g.graph, l, &cfg.sample_seeds(), &pool);
    let sampled = start.elapsed();

    let exact = if args.exact {
        Some(forest_matrix_column(&g.graph, j, EXACT_TOL).context("exact column solve")?[i.index()])
    } else {
        None
    };
    let methods = match args.method {
        Some(m) => vec![m],
        None => vec![Method::Sfq, Method::SfqPlus],
    };
    let mut results = Vec::new();
    for method in methods {
        let t = Instant::now();
        let est = query(&g.graph, &list, i, j, method)?;
        results.push(QueryResult {
            method,
            estimate: est.value,
            samples: l,
            wall: sampled + t.elapsed(),
            exact,
        });
    }

    write!(
        out,
        "{}",
        cfg.header(
            "query",
            &[("i", args.i.to_string()), ("j", args.j.to_string())]
        )
    )?;
    write!(out, "method,i,j,estimate,samples,wall_s")?;
    if exact.is_some() {
        write!(out, ",exact,abs_error")?;
    }
    writeln!(out)?;
    for r in &results {
        write!(
            out,
            "{},{},{},{:.9},{},{:.6}",
            r.method,
            args.i,
            args.j,
            r.estimate,
            r.samples,
            r.wall.as_secs_f64()
        )?;
        if let Some(x) = r.exact {
            write!(out, ",{x:.9},{:.3e}", (r.estimate - x).abs())?;
        }
        writeln!(out)?;
    }
    Ok(results)
}

/// Node pair resolution shared with `replay`.
pub(crate) fn resolve_pair(
    g: &LoadedGraph,
    (a, b): (u64, u64),
) -> anyhow::Result<(NodeId, NodeId)> {
    let find = |l| g.node(l).ok_or_else(|| anyhow!("node {l} not in graph"));
    Ok((find(a)?, find(b)?))
}
