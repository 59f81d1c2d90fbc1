use std::fmt;
use std::io::Write;

use forestq_core::dynamic::{apply_event, delete_update, insert_update};
use forestq_core::oracle::{cross_check, enumerate_forests, ForestSet};
use forestq_core::{Digraph, Edge, ForestList, NodeId, SeedStream, UpdateEvent};
use rand::Rng;
use rayon::ThreadPool;

use crate::config::RunConfig;
use crate::io::LoadedGraph;
use crate::parallel::{build_pool, sample_list};
use crate::stats::uniform_chi_square_p;
use crate::synth::erdos_renyi;

#[derive(Clone, Debug)]
pub struct ValidateArgs {
    /// Extra random digraphs to check.
    pub random: usize,
    /// Largest node count of the random digraphs.
    pub max_nodes: usize,
    /// Forests drawn for the sampler goodness-of-fit test.
    pub samples: u64,
    /// Size of the list used for the invariant checks.
    pub list_size: u64,
    /// Family-wise significance of the sampler tests.
    pub alpha: f64,
    /// Corrupts one forest with a cycle before the list checks.
    pub inject_cycle: bool,
}

impl Default for ValidateArgs {
    fn default() -> Self {
        ValidateArgs {
            random: 0,
            max_nodes: 5,
            samples: 100_000,
            list_size: 200,
            alpha: 0.001,
            inject_cycle: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckLine {
    pub graph: String,
    pub check: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} {} {}: {}", self.graph, self.check, self.detail)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ValidateReport {
    pub lines: Vec<CheckLine>,
}

impl ValidateReport {
    pub fn passed(&self) -> bool {
        !self.lines.is_empty() && self.lines.iter().all(|l| l.passed)
    }
}

const INPUT: &str = "input";

struct Checker<'a> {
    graph: String,
    lines: &'a mut Vec<CheckLine>,
}

impl Checker<'_> {
    fn record(&mut self, check: &'static str, result: Result<String, String>) {
        let (passed, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.lines.push(CheckLine {
            graph: self.graph.clone(),
            check,
            passed,
            detail,
        });
    }
}

fn check_oracle(g: &Digraph) -> Result<String, String> {
    let r = cross_check(g).map_err(|e| e.to_string())?;
    if r.passed() {
        Ok(format!(
            "|F|={} max_diff={:.1e}",
            r.forest_count, r.max_abs_diff
        ))
    } else {
        Err(r.mismatch_lines().join("; "))
    }
}

fn check_sampler(
    g: &Digraph,
    set: &ForestSet,
    samples: u64,
    alpha: f64,
    seeds: &SeedStream,
    pool: &ThreadPool,
) -> Result<String, String> {
    let list = sample_list(g, samples, seeds, pool);
    let mut counts = vec![0.0; set.len()];
    for f in &list {
        let k = set
            .position(f)
            .ok_or_else(|| format!("sampled forest outside F(G):\n{f}"))?;
        counts[k] += 1.0;
    }
    let p = uniform_chi_square_p(&counts);
    let detail = format!(
        "chi-square p={p:.4} (threshold {alpha:.2e}, {samples} samples, {} classes)",
        set.len()
    );
    if set.len() < 2 || p > alpha {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Every single-edge insertion and deletion applied to the exact uniform
/// list must give equal weight to every forest of the new graph.
fn check_dynamic(g: &Digraph, set: &ForestSet) -> Result<String, String> {
    let n = g.node_count();
    let mut checked = 0;
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let e = Edge::new(u, v);
            let mut g2 = g.clone();
            let mut list =
                ForestList::from_forests((0..set.len()).map(|k| set.forest(k)).collect());
            let insert = !g.has_edge(e.from, e.to);
            let res = if insert {
                insert_update(&mut g2, &mut list, e)
            } else {
                delete_update(&mut g2, &mut list, e)
            };
            res.map_err(|err| format!("{e}: {err}"))?;
            let after = enumerate_forests(&g2).map_err(|err| err.to_string())?;
            let mut w = vec![0u64; after.len()];
            for f in &list {
                let k = after
                    .position(f)
                    .ok_or_else(|| format!("{e}: forest outside F(G'):\n{f}"))?;
                w[k] += f.multiplicity();
            }
            if w.iter().any(|&x| x != w[0]) {
                let op = if insert { "insert" } else { "delete" };
                return Err(format!("{op} {e}: unequal weights {w:?}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} single-edge updates exact"))
}

fn check_list(
    g: &Digraph,
    cfg: &RunConfig,
    args: &ValidateArgs,
    pool: &ThreadPool,
) -> Result<String, String> {
    let mut list = sample_list(g, args.list_size, &cfg.sample_seeds().derive(1), pool);
    if args.inject_cycle && g.node_count() > 0 {
        let f = &mut list.forests_mut()[0];
        f.inject_successor(NodeId::new(0), Some(NodeId::new(0)));
    }
    list.validate(g).map_err(|d| format!("initial list: {d}"))?;
    if g.node_count() < 2 {
        return Ok("list valid".into());
    }
    let mut g = g.clone();
    let n = g.node_count();
    let mut rng = cfg.workload_seeds().rng(n as u64);
    let prune_cfg = cfg.prune(args.list_size);
    let mut prng = cfg.prune_seeds().rng(0);
    let steps = 6;
    for seq in 0..steps {
        // Toggle a random pair: delete it if present, insert it otherwise.
        let u = rng.gen_range(0..n);
        let v = (u + rng.gen_range(1..n)) % n;
        let e = Edge::new(u, v);
        let ev = if g.has_edge(e.from, e.to) {
            UpdateEvent::delete(e, seq)
        } else {
            UpdateEvent::insert(e, seq)
        };
        apply_event(&mut g, &mut list, &ev, &prune_cfg, &mut prng).map_err(|e| e.to_string())?;
        list.validate(&g)
            .map_err(|d| format!("after event {seq}: {d}"))?;
        if list.total_weight() > prune_cfg.threshold() {
            return Err(format!(
                "total weight {} above threshold",
                list.total_weight()
            ));
        }
    }
    Ok(format!("list valid through {steps} updates"))
}

#[allow(clippy::too_many_arguments)]
fn validate_graph(
    name: String,
    g: &Digraph,
    cfg: &RunConfig,
    args: &ValidateArgs,
    alpha: f64,
    seeds: &SeedStream,
    pool: &ThreadPool,
    lines: &mut Vec<CheckLine>,
) {
    let mut c = Checker { graph: name, lines };
    c.record("oracle", check_oracle(g));
    match enumerate_forests(g) {
        Ok(set) => {
            c.record(
                "sampler",
                check_sampler(g, &set, args.samples, alpha, seeds, pool),
            );
            c.record("dynamic", check_dynamic(g, &set));
        }
        Err(e) => c.record("enumerate", Err(e.to_string())),
    }
    c.record("list", check_list(g, cfg, args, pool));
}

/// Runs the invariant battery on the loaded graph and on `args.random`
/// random digraphs. The sampler significance is split evenly across graphs.
pub fn run_validate(
    cfg: &RunConfig,
    loaded: Option<&LoadedGraph>,
    args: &ValidateArgs,
    out: &mut dyn Write,
) -> anyhow::Result<ValidateReport> {
    anyhow::ensure!(
        loaded.is_some() || args.random > 0,
        "nothing to validate: pass --graph or --random N"
    );
    anyhow::ensure!(args.max_nodes >= 1, "--max-nodes must be positive");
    let pool = build_pool(cfg.threads)?;
    let graphs = usize::from(loaded.is_some()) + args.random;
    let alpha = args.alpha / graphs as f64;
    write!(
        out,
        "{}",
        cfg.header(
            "validate",
            &[
                ("random", args.random.to_string()),
                ("max_nodes", args.max_nodes.to_string()),
                ("samples", args.samples.to_string()),
                ("alpha", format!("{}", args.alpha)),
            ]
        )
    )?;
    let mut report = ValidateReport::default();
    let base = cfg.sample_seeds();
    if let Some(g) = loaded {
        validate_graph(
            INPUT.into(),
            &g.graph,
            cfg,
            args,
            alpha,
            &base,
            &pool,
            &mut report.lines,
        );
    }
    let mut rng = cfg.workload_seeds().rng(u64::MAX);
    for k in 0..args.random {
        let n = 1 + k % args.max_nodes;
        let g = erdos_renyi(n, 0.45, &mut rng);
        let seeds = base.derive(k as u64 + 2);
        validate_graph(
            format!("random{k}(n={n},m={})", g.edge_count()),
            &g,
            cfg,
            args,
            alpha,
            &seeds,
            &pool,
            &mut report.lines,
        );
    }
    for l in &report.lines {
        if !l.passed || l.graph == INPUT {
            writeln!(out, "{l}")?;
        }
    }
    let failed = report.lines.iter().filter(|l| !l.passed).count();
    writeln!(
        out,
        "{} {} checks, {failed} failed",
        if failed == 0 { "PASS" } else { "FAIL" },
        report.lines.len()
    )?;
    Ok(report)
}
