use std::io::Write;
use std::time::Instant;

use anyhow::Context;
use forestq_core::dynamic::apply_event;
use forestq_core::oracle::{forest_matrix_column, MAX_DENSE_NODES};
use forestq_core::{required_samples, sfq_query, sfqplus_query, NodeId, UpdateKind};

use super::query::{resolve_pair, EXACT_TOL};
use crate::config::RunConfig;
use crate::io::{LoadedGraph, UpdateStream};
use crate::parallel::{build_pool, sample_list};

#[derive(Clone, Debug, Default)]
pub struct ReplayArgs {
    pub stream: UpdateStream,
    /// Stream file name, echoed in the header.
    pub stream_name: String,
    /// Node label pairs queried after every event.
    pub queries: Vec<(u64, u64)>,
    pub samples: Option<u64>,
}

/// Wall-clock cost of one event. Kept out of the main CSV so that output
/// stays byte-identical across runs.
#[derive(Clone, Copy, Debug)]
pub struct EventTiming {
    pub sequence: u64,
    pub update_s: f64,
    pub query_s: f64,
}

#[derive(Clone, Debug)]
pub struct FinalCheck {
    pub i: u64,
    pub j: u64,
    pub sfq: f64,
    pub sfqplus: f64,
    pub exact: f64,
}

#[derive(Clone, Debug, Default)]
pub struct ReplayReport {
    pub timings: Vec<EventTiming>,
    pub total_weights: Vec<u64>,
    /// Post-replay comparison with exact values; empty on large graphs.
    pub finals: Vec<FinalCheck>,
}

impl ReplayReport {
    pub fn write_timings(&self, out: &mut dyn Write) -> std::io::Result<()> {
        writeln!(out, "seq,update_s,query_s")?;
        for t in &self.timings {
            writeln!(out, "{},{:.9},{:.9}", t.sequence, t.update_s, t.query_s)?;
        }
        Ok(())
    }
}

/// Replays the update stream on `g`, writing one CSV row per event.
pub fn run_replay(
    cfg: &RunConfig,
    g: &mut LoadedGraph,
    args: &ReplayArgs,
    out: &mut dyn Write,
) -> anyhow::Result<ReplayReport> {
    let pairs: Vec<(NodeId, NodeId)> = args
        .queries
        .iter()
        .map(|&p| resolve_pair(g, p))
        .collect::<anyhow::Result<_>>()?;
    // The diagonal bound dominates every entry class.
    let l = args
        .samples
        .unwrap_or_else(|| required_samples(&cfg.params(), 0, true));
    anyhow::ensure!(l >= 1, "--samples must be positive");
    let prune_cfg = cfg.prune(l);
    let pool = build_pool(cfg.threads)?;
    let mut list = sample_list(&g.graph, l, &cfg.sample_seeds(), &pool);
    let mut rng = cfg.prune_seeds().rng(0);

    let queries = args
        .queries
        .iter()
        .map(|(a, b)| format!("{a}:{b}"))
        .collect::<Vec<_>>()
        .join(";");
    write!(
        out,
        "{}",
        cfg.header(
            "replay",
            &[
                ("stream", args.stream_name.clone()),
                ("events", args.stream.events.len().to_string()),
                ("samples", l.to_string()),
                ("prune_threshold", prune_cfg.threshold().to_string()),
                (
                    "queries",
                    if queries.is_empty() {
                        "-".into()
                    } else {
                        queries
                    }
                ),
            ]
        )
    )?;
    write!(
        out,
        "seq,op,u,v,spawned,cut,doubled,pruned,total_weight,forests"
    )?;
    for (a, b) in &args.queries {
        write!(out, ",sfq_{a}_{b},sfqplus_{a}_{b}")?;
    }
    writeln!(out)?;

    let mut report = ReplayReport::default();
    for (index, ev) in args.stream.events.iter().enumerate() {
        let t = Instant::now();
        let outcome =
            apply_event(&mut g.graph, &mut list, ev, &prune_cfg, &mut rng).with_context(|| {
                format!(
                    "event {index} (line {}) {} {} {}",
                    args.stream.lines[index],
                    if ev.kind == UpdateKind::Insert {
                        "I"
                    } else {
                        "D"
                    },
                    g.label(ev.edge.from),
                    g.label(ev.edge.to)
                )
            })?;
        let update_s = t.elapsed().as_secs_f64();
        let s = outcome.stats;
        write!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            ev.sequence,
            if ev.kind == UpdateKind::Insert {
                "I"
            } else {
                "D"
            },
            g.label(ev.edge.from),
            g.label(ev.edge.to),
            s.spawned,
            s.cut,
            s.doubled,
            u8::from(outcome.pruned),
            list.total_weight(),
            list.len()
        )?;
        let t = Instant::now();
        for &(i, j) in &pairs {
            let a = sfq_query(&list, i, j)?.value;
            let b = sfqplus_query(&g.graph, &list, i, j)?.value;
            write!(out, ",{a:.9},{b:.9}")?;
        }
        let query_s = t.elapsed().as_secs_f64();
        writeln!(out)?;
        report.timings.push(EventTiming {
            sequence: ev.sequence,
            update_s,
            query_s,
        });
        report.total_weights.push(list.total_weight());
    }

    if g.graph.node_count() <= MAX_DENSE_NODES {
        for (&(i, j), &(a, b)) in pairs.iter().zip(&args.queries) {
            let exact = forest_matrix_column(&g.graph, j, EXACT_TOL)?[i.index()];
            report.finals.push(FinalCheck {
                i: a,
                j: b,
                sfq: sfq_query(&list, i, j)?.value,
                sfqplus: sfqplus_query(&g.graph, &list, i, j)?.value,
                exact,
            });
        }
    }
    Ok(report)
}
