use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use forestq::commands::{
    run_bench, run_query, run_replay, run_validate, BenchArgs, QueryArgs, ReplayArgs, ValidateArgs,
};
use forestq::core::Method;
use forestq::io::load_update_stream_file;
use forestq::synth::sparse_random;
use forestq::{Mode, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "forestq",
    version,
    about = "Forest matrix entry queries on dynamic digraphs"
)]
struct Cli {
    /// Edge list, one "u v" pair per line.
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    #[arg(long, global = true, default_value = "directed")]
    mode: Mode,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Absolute error for off-diagonal entries, relative for diagonal ones.
    #[arg(long, global = true, default_value_t = 0.03)]
    epsilon: f64,
    /// Failure probability.
    #[arg(long, global = true, default_value_t = 0.01)]
    delta: f64,
    /// The list is pruned back to l' = factor · l.
    #[arg(long, global = true, default_value_t = 5.0)]
    prune_factor: f64,
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate one entry of the forest matrix.
    Query {
        i: u64,
        j: u64,
        /// sfq, sfqplus or both.
        #[arg(long, default_value = "both")]
        method: String,
        /// Override the sample count derived from epsilon and delta.
        #[arg(long)]
        samples: Option<u64>,
        /// Also solve for the exact value.
        #[arg(long)]
        exact: bool,
    },
    /// Apply an update stream ("I u v" / "D u v"), querying after each event.
    Replay {
        stream: PathBuf,
        /// Entry to track, as "i,j". Repeatable.
        #[arg(long = "query", value_parser = parse_pair)]
        queries: Vec<(u64, u64)>,
        #[arg(long)]
        samples: Option<u64>,
        /// CSV output path; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Per-event wall-clock timings, written separately.
        #[arg(long)]
        timings: Option<PathBuf>,
    },
    /// Time sampling, queries and updates on the input graph or on random
    /// sparse digraphs.
    Bench {
        /// Node counts of synthetic graphs, used when --graph is absent.
        #[arg(long, value_delimiter = ',', default_value = "1000,10000")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        min_out: usize,
        #[arg(long, default_value_t = 6)]
        max_out: usize,
        #[arg(long, default_value_t = 100)]
        queries: usize,
        #[arg(long, default_value_t = 50)]
        inserts: usize,
        #[arg(long, default_value_t = 50)]
        deletes: usize,
        #[arg(long, default_value_t = 1590)]
        samples: u64,
    },
    /// Check the oracle, sampler and update invariants on small graphs.
    Validate {
        /// Number of additional random digraphs.
        #[arg(long, default_value_t = 0)]
        random: usize,
        #[arg(long, default_value_t = 5)]
        max_nodes: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0.001)]
        alpha: f64,
        #[arg(long, hide = true)]
        inject_cycle: bool,
    },
}

fn parse_pair(s: &str) -> Result<(u64, u64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"i,j\", got \"{s}\""))?;
    let parse = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("{t}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

fn parse_method(s: &str) -> anyhow::Result<Option<Method>> {
    if s.eq_ignore_ascii_case("both") {
        Ok(None)
    } else {
        Ok(Some(s.parse().map_err(|e| anyhow::anyhow!("{e}"))?))
    }
}

fn create(path: &PathBuf) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let cfg = RunConfig {
        graph: cli.graph,
        mode: cli.mode,
        seed: cli.seed,
        epsilon: cli.epsilon,
        delta: cli.delta,
        prune_factor: cli.prune_factor,
        threads: cli.threads,
    };
    cfg.validate()?;
    let stdout = io::stdout();
    let mut out = stdout.lock();

    match cli.command {
        Command::Query {
            i,
            j,
            method,
            samples,
            exact,
        } => {
            let g = cfg.load_graph()?;
            report_drops(&g);
            let args = QueryArgs {
                i,
                j,
                method: parse_method(&method)?,
                samples,
                exact,
            };
            run_query(&cfg, &g, &args, &mut out)?;
        }
        Command::Replay {
            stream,
            queries,
            samples,
            output,
            timings,
        } => {
            let mut g = cfg.load_graph()?;
            report_drops(&g);
            let events = load_update_stream_file(&stream, &g)
                .with_context(|| format!("reading {}", stream.display()))?;
            let args = ReplayArgs {
                stream: events,
                stream_name: stream.display().to_string(),
                queries,
                samples,
            };
            let report = match &output {
                Some(p) => {
                    let mut w = create(p)?;
                    let r = run_replay(&cfg, &mut g, &args, &mut w)?;
                    w.flush()?;
                    r
                }
                None => run_replay(&cfg, &mut g, &args, &mut out)?,
            };
            if let Some(p) = &timings {
                let mut w = create(p)?;
                write!(
                    w,
                    "{}",
                    cfg.header("replay-timings", &[("stream", args.stream_name.clone())])
                )?;
                report.write_timings(&mut w)?;
                w.flush()?;
            }
            for f in &report.finals {
                eprintln!(
                    "final ({}, {}): exact={:.6} SFQ={:.6} SFQPlus={:.6}",
                    f.i, f.j, f.exact, f.sfq, f.sfqplus
                );
            }
        }
        Command::Bench {
            sizes,
            min_out,
            max_out,
            queries,
            inserts,
            deletes,
            samples,
        } => {
            let graphs = match &cfg.graph {
                Some(p) => vec![(p.display().to_string(), cfg.load_graph()?.graph)],
                None => {
                    anyhow::ensure!(min_out <= max_out, "--min-out exceeds --max-out");
                    let mut rng = cfg.workload_seeds().rng(0);
                    sizes
                        .iter()
                        .map(|&n| {
                            anyhow::ensure!(
                                n > max_out,
                                "size {n} too small for out-degree {max_out}"
                            );
                            Ok((
                                format!("random{n}"),
                                sparse_random(n, min_out, max_out, &mut rng),
                            ))
                        })
                        .collect::<anyhow::Result<_>>()?
                }
            };
            let args = BenchArgs {
                queries,
                inserts,
                deletes,
                samples,
            };
            run_bench(&cfg, &graphs, &args, &mut out)?;
        }
        Command::Validate {
            random,
            max_nodes,
            samples,
            alpha,
            inject_cycle,
        } => {
            let g = cfg.graph.as_ref().map(|_| cfg.load_graph()).transpose()?;
            let args = ValidateArgs {
                random,
                max_nodes,
                samples,
                alpha,
                inject_cycle,
                ..ValidateArgs::default()
            };
            let report = run_validate(&cfg, g.as_ref(), &args, &mut out)?;
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn report_drops(g: &forestq::LoadedGraph) {
    if g.duplicates > 0 || g.self_loops > 0 {
        eprintln!(
            "loader dropped {} duplicate edges and {} self-loops",
            g.duplicates, g.self_loops
        );
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
