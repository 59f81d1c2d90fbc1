use std::io::Write;
use std::time::Instant;

use forestq_core::dynamic::apply_event;
use forestq_core::oracle::{exact_forest_matrix, MAX_DENSE_NODES};
use forestq_core::{sfq_query, sfqplus_query, Digraph, ForestList, NodeId};
use rand::Rng;

use crate::config::RunConfig;
use crate::parallel::{build_pool, sample_list};
use crate::synth::random_update_stream;

#[derive(Clone, Debug)]
pub struct BenchArgs {
    /// Query pairs per phase; half diagonal, half off-diagonal.
    pub queries: usize,
    pub inserts: usize,
    pub deletes: usize,
    pub samples: u64,
}

impl Default for BenchArgs {
    fn default() -> Self {
        BenchArgs {
            queries: 100,
            inserts: 50,
            deletes: 50,
            samples: 1590,
        }
    }
}

/// Median timings in seconds for one graph.
#[derive(Clone, Debug)]
pub struct BenchRow {
    pub name: String,
    pub n: usize,
    pub m: usize,
    pub samples: u64,
    pub sample_s: f64,
    pub sfq_static: f64,
    pub sfqplus_static: f64,
    pub update: f64,
    pub sfq_dynamic: f64,
    pub sfqplus_dynamic: f64,
    /// Dense exact solve, when the graph is small enough.
    pub solver: Option<f64>,
}

pub const COLUMNS: &str = "graph,n,m,l,Sample,SFQ-S,SFQPlus-S,Update,SFQ-D,SFQPlus-D,Solver";

impl BenchRow {
    pub fn csv(&self) -> String {
        let solver = self
            .solver
            .map_or_else(|| "NA".to_string(), |s| format!("{s:.3e}"));
        format!(
            "{},{},{},{},{:.3e},{:.3e},{:.3e},{:.3e},{:.3e},{:.3e},{solver}",
            self.name,
            self.n,
            self.m,
            self.samples,
            self.sample_s,
            self.sfq_static,
            self.sfqplus_static,
            self.update,
            self.sfq_dynamic,
            self.sfqplus_dynamic
        )
    }
}

pub fn median(xs: &mut [f64]) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(f64::total_cmp);
    let k = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[k]
    } else {
        (xs[k - 1] + xs[k]) / 2.0
    }
}

fn query_pairs<R: Rng>(n: usize, count: usize, rng: &mut R) -> Vec<(NodeId, NodeId)> {
    (0..count)
        .map(|k| {
            let i = rng.gen_range(0..n);
            let j = if k % 2 == 0 { i } else { rng.gen_range(0..n) };
            (NodeId::new(i), NodeId::new(j))
        })
        .collect()
}

fn time_queries(g: &Digraph, list: &ForestList, pairs: &[(NodeId, NodeId)]) -> (f64, f64) {
    let mut sfq = Vec::with_capacity(pairs.len());
    let mut plus = Vec::with_capacity(pairs.len());
    for &(i, j) in pairs {
        let t = Instant::now();
        std::hint::black_box(sfq_query(list, i, j).unwrap());
        sfq.push(t.elapsed().as_secs_f64());
        let t = Instant::now();
        std::hint::black_box(sfqplus_query(g, list, i, j).unwrap());
        plus.push(t.elapsed().as_secs_f64());
    }
    (median(&mut sfq), median(&mut plus))
}

/// Samples a list on `g`, times static queries, replays a random update
/// stream timing each event, then times queries on the updated list.
pub fn bench_graph(
    cfg: &RunConfig,
    name: &str,
    g: &Digraph,
    args: &BenchArgs,
) -> anyhow::Result<BenchRow> {
    let n = g.node_count();
    anyhow::ensure!(n >= 2, "benchmark graph needs at least two nodes");
    anyhow::ensure!(args.queries >= 1 && args.samples >= 1, "empty benchmark");
    let pool = build_pool(cfg.threads)?;
    let mut rng = cfg.workload_seeds().rng(n as u64);
    let m = g.edge_count();

    let solver = if n <= MAX_DENSE_NODES {
        let t = Instant::now();
        std::hint::black_box(exact_forest_matrix(g)?);
        Some(t.elapsed().as_secs_f64())
    } else {
        None
    };

    let t = Instant::now();
    let mut list = sample_list(g, args.samples, &cfg.sample_seeds(), &pool);
    let sample_s = t.elapsed().as_secs_f64();

    let pairs = query_pairs(n, args.queries, &mut rng);
    let (sfq_static, sfqplus_static) = time_queries(g, &list, &pairs);

    let mut g = g.clone();
    let events = random_update_stream(&g, args.inserts, args.deletes, 1, &mut rng);
    let prune_cfg = cfg.prune(args.samples);
    let mut prune_rng = cfg.prune_seeds().rng(0);
    let mut updates = Vec::with_capacity(events.len());
    for ev in &events {
        let t = Instant::now();
        apply_event(&mut g, &mut list, ev, &prune_cfg, &mut prune_rng)?;
        updates.push(t.elapsed().as_secs_f64());
    }
    let update = if updates.is_empty() {
        0.0
    } else {
        median(&mut updates)
    };
    let (sfq_dynamic, sfqplus_dynamic) = time_queries(&g, &list, &pairs);

    Ok(BenchRow {
        name: name.to_string(),
        n,
        m,
        samples: args.samples,
        sample_s,
        sfq_static,
        sfqplus_static,
        update,
        sfq_dynamic,
        sfqplus_dynamic,
        solver,
    })
}

pub fn run_bench(
    cfg: &RunConfig,
    graphs: &[(String, Digraph)],
    args: &BenchArgs,
    out: &mut dyn Write,
) -> anyhow::Result<Vec<BenchRow>> {
    write!(
        out,
        "{}",
        cfg.header(
            "bench",
            &[
                ("samples", args.samples.to_string()),
                ("queries", args.queries.to_string()),
                ("inserts", args.inserts.to_string()),
                ("deletes", args.deletes.to_string()),
                ("unit", "seconds (median per query/update)".into()),
            ]
        )
    )?;
    writeln!(out, "{COLUMNS}")?;
    let mut rows = Vec::new();
    for (name, g) in graphs {
        let row = bench_graph(cfg, name, g, args)?;
        writeln!(out, "{}", row.csv())?;
        out.flush()?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_odd_and_even() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn three_cycle_has_all_columns() {
        let g = Digraph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let args = BenchArgs {
            queries: 20,
            inserts: 2,
            deletes: 1,
            samples: 300,
        };
        let mut buf = Vec::new();
        let rows = run_bench(
            &RunConfig::default(),
            &[("cycle3".into(), g)],
            &args,
            &mut buf,
        )
        .unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(lines[0], COLUMNS);
        assert_eq!(lines[1].split(',').count(), COLUMNS.split(',').count());
        assert!(rows[0].solver.is_some());
        assert!(rows[0].sfq_static > 0.0 && rows[0].update > 0.0);
    }
}
