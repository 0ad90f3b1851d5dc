use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use falqon::falqon::run_falqon;
use falqon::graphs::{emit_graph6, enumerate_cubic_graphs};
use falqon::ShotPolicy;
use falqon_bench::plan::parse_index_list;
use falqon_bench::seeds::{cell_seed, stream_seed};
use falqon_bench::significance::{all_pairs, DEFAULT_ALPHA};
use falqon_bench::summary::write_tidy_csv;
use falqon_bench::{
    run_plan, significance_report, summarize, BenchmarkPlan, EnsembleSource, Instance, MethodSpec,
    PlanConfig, RunOptions, Store,
};

/// FALQON, Optimal FALQON and QAOA benchmarks on cubic MaxCut instances.
#[derive(Parser)]
#[command(name = "falqon-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write every non-isomorphic cubic graph on n vertices as graph6 lines.
    GenerateEnsemble {
        #[arg(long, default_value_t = 12)]
        n: usize,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a benchmark plan into a result store.
    Run(RunArgs),
    /// Median tables of a result store.
    Summarize {
        /// Result store directory.
        #[arg(long, default_value = "results")]
        store: PathBuf,
        /// Write overall and per-depth medians as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write every record in long format (method, depth, instance, metric, value).
        #[arg(long)]
        tidy: Option<PathBuf>,
    },
    /// Paired Wilcoxon tests with Holm correction per metric.
    Significance {
        #[arg(long, default_value = "results")]
        store: PathBuf,
        /// Comma-separated `a:b` method pairs; every pair of stored methods when omitted.
        #[arg(long)]
        pairs: Option<String>,
        /// Depths to test, e.g. `5` or `1..10`; every stored depth when omitted.
        #[arg(long)]
        depths: Option<String>,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// CSV output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the per-layer trace of one FALQON run as JSON lines.
    Trace {
        #[arg(long, default_value = "builtin")]
        graphs: String,
        #[arg(long, default_value_t = 0)]
        instance: usize,
        #[arg(long, default_value = "opt-falqon-fo")]
        method: String,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        /// Shots per feedback and cost estimate; 0 means exact.
        #[arg(long, default_value_t = 0)]
        shots: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// JSON plan file; flags given here override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `builtin`, `builtin:<n>` or a graph6 file.
    #[arg(long)]
    graphs: Option<String>,
    /// Ensemble indices, e.g. `0..19` or `0,5,9`.
    #[arg(long)]
    instances: Option<String>,
    /// Comma-separated method ids, or `all`.
    #[arg(long)]
    methods: Option<String>,
    /// Depths, e.g. `1..10`.
    #[arg(long)]
    depths: Option<String>,
    /// Shots per cost estimate; 0 means exact expectations.
    #[arg(long)]
    shots: Option<u32>,
    /// Shots for the final success probability; 0 means exact.
    #[arg(long)]
    success_shots: Option<u32>,
    /// QAOA gradient-descent learning rate.
    #[arg(long)]
    learning_rate: Option<f64>,
    /// QAOA gradient-descent finite-difference step.
    #[arg(long)]
    fd_step: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Continue an existing store of the same plan.
    #[arg(long)]
    resume: bool,
    /// Report every finished cell.
    #[arg(short, long)]
    verbose: bool,
}

impl RunArgs {
    fn plan(&self) -> anyhow::Result<BenchmarkPlan> {
        let mut plan = BenchmarkPlan::default();
        if let Some(path) = &self.config {
            plan.apply(PlanConfig::from_file(path)?)?;
        }
        plan.apply(PlanConfig {
            graphs: self.graphs.clone(),
            instances: self.instances.clone(),
            methods: self.methods.clone(),
            depths: self.depths.clone(),
            shots: self.shots,
            success_shots: self.success_shots,
            learning_rate: self.learning_rate,
            fd_step: self.fd_step,
            seed: self.seed,
            workers: self.workers,
            out: self.out.clone(),
        })?;
        Ok(plan)
    }
}

fn output(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::GenerateEnsemble { n, out } => {
            let start = Instant::now();
            let graphs = enumerate_cubic_graphs(n)?;
            let mut w = output(out.as_deref())?;
            for g in &graphs {
                writeln!(w, "{}", emit_graph6(g))?;
            }
            w.flush()?;
            eprintln!(
                "{} cubic graphs on {n} vertices in {:.2} s",
                graphs.len(),
                start.elapsed().as_secs_f64()
            );
        }
        Command::Run(args) => {
            let plan = args.plan()?;
            let start = Instant::now();
            let report = run_plan(
                &plan,
                RunOptions {
                    resume: args.resume,
                    verbose: args.verbose,
                },
            )?;
            eprintln!(
                "{} cells: {} computed, {} failed, {} already stored ({:.1} s) -> {}",
                report.total,
                report.computed,
                report.failed,
                report.skipped,
                start.elapsed().as_secs_f64(),
                plan.out.display()
            );
        }
        Command::Summarize { store, csv, tidy } => {
            let store = Store::new(store);
            let records = store.load_records()?;
            let failures = store.load_failures()?;
            if !failures.is_empty() {
                eprintln!("{} failed cells left out of the summary", failures.len());
            }
            let summary = summarize(&records)?;
            print!("{}", summary.to_text());
            if let Some(path) = csv {
                summary.write_csv(output(Some(&path))?)?;
            }
            if let Some(path) = tidy {
                write_tidy_csv(&records, output(Some(&path))?)?;
            }
        }
        Command::Significance {
            store,
            pairs,
            depths,
            alpha,
            out,
        } => {
            let store = Store::new(store);
            let records = store.load_records()?;
            let pairs = match pairs {
                Some(text) => parse_pairs(&text)?,
                None => {
                    let manifest = store.manifest()?.context("store has no manifest")?;
                    all_pairs(
                        &manifest
                            .methods
                            .iter()
                            .map(MethodSpec::id)
                            .collect::<Vec<_>>(),
                    )
                }
            };
            let depths = depths.as_deref().map(parse_index_list).transpose()?;
            let report = significance_report(&records, &pairs, depths.as_deref(), alpha)?;
            report.write_csv(output(out.as_deref())?)?;
        }
        Command::Trace {
            graphs,
            instance,
            method,
            depth,
            shots,
            seed,
            out,
        } => {
            let MethodSpec::Falqon(falqon_method) = method.parse::<MethodSpec>()? else {
                bail!("`{method}` is not a FALQON method");
            };
            let ensemble = EnsembleSource::parse(&graphs)?.load()?;
            let graph = ensemble.get(instance).cloned().with_context(|| {
                format!(
                    "instance {instance} outside an ensemble of {} graphs",
                    ensemble.len()
                )
            })?;
            let inst = Instance::new(instance, graph)?;
            let config = falqon_method.config(depth, ShotPolicy::from_shots(shots));
            let cell = cell_seed(
                seed,
                &MethodSpec::Falqon(falqon_method).id(),
                instance,
                depth,
            );
            let run = run_falqon(&inst.problem, &config, stream_seed(cell, "falqon"))?;
            let mut w = output(out.as_deref())?;
            run.trace.write_json_lines(&mut w)?;
            w.flush()?;
            if let Some(cost) = run.trace.final_cost() {
                eprintln!("final cost {cost:.6}, {} evaluations", run.n_evals);
            }
        }
    }
    Ok(())
}

fn parse_pairs(text: &str) -> anyhow::Result<Vec<(String, String)>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|pair| match pair.split_once(':') {
            Some((a, b)) => Ok((a.parse::<MethodSpec>()?.id(), b.parse::<MethodSpec>()?.id())),
            None => bail!("bad pair `{pair}`, expected <method>:<method>"),
        })
        .collect()
}
