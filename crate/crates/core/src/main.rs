//! Command-line surface: signal simulation, factor-graph learning,
//! centrality detection, Monte-Carlo experiments and result aggregation.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad arguments, malformed
//! files), 2 on numeric or convergence failures.

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

use prodgraph::error::Error;
use prodgraph::filters::FilterSpec;
use prodgraph::graph::{
    build_interaction, gen_core_periphery, gen_erdos_renyi, gen_path, max_degree_scale, Gamma,
    Graph, InteractionGraphSpec,
};
use prodgraph::harness::{
    self, aggregate, read_results_csv, run_experiment, write_results_csv, write_summary_csv,
    write_timing_csv, ExperimentConfig, Method,
};
use prodgraph::signals::{read_batch, synthesize, write_batch};
use prodgraph::spectral::write_estimate;
use prodgraph::topology::{SolveReportJson, SolverOptions};
use prodgraph::TrialRng;

#[derive(Parser)]
#[command(
    name = "prodgraph",
    version,
    about = "Product graph learning from multi-attribute graph signals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate factor graphs, filter white excitation through them, and
    /// write the resulting signal batch as CSV.
    Simulate(SimulateArgs),
    /// Learn both factor adjacency matrices from a signal CSV.
    Learn(LearnArgs),
    /// Detect the top-k central physical nodes from a signal CSV.
    Centrality(CentralityArgs),
    /// Run a Monte-Carlo experiment from a JSON config and write result rows.
    Experiment(ExperimentArgs),
    /// Aggregate a results CSV into per-grid-point summary statistics.
    Aggregate(AggregateArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Physical graph size.
    #[arg(long)]
    n: usize,
    /// Coupling graph size (path graph).
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Physical graph family: "er" or "core-periphery".
    #[arg(long, default_value = "er")]
    graph: String,
    /// Edge probability for the Erdos-Renyi physical graph.
    #[arg(long, default_value_t = 0.4)]
    er_p: f64,
    /// Core size for the core-periphery physical graph.
    #[arg(long, default_value_t = 10)]
    core_size: usize,
    /// Core-periphery edge probability.
    #[arg(long, default_value_t = 0.2)]
    p_cp: f64,
    /// Periphery-periphery edge probability.
    #[arg(long, default_value_t = 0.05)]
    p_pp: f64,
    /// First coupling parameter; the triple is (g1, 2 g1, 1 - 3 g1).
    #[arg(long)]
    gamma1: f64,
    /// Filter kind: "exp", "inv", "fj", "diffusion", or a path to a filter
    /// JSON file.
    #[arg(long, default_value = "exp")]
    filter: String,
    /// Multiplier on 1/max-degree for exp/inv filters.
    #[arg(long, default_value_t = 1.0)]
    tau_scale: f64,
    /// Number of samples.
    #[arg(long)]
    s: usize,
    /// Observation noise variance.
    #[arg(long, default_value_t = 0.01)]
    sigma2: f64,
    #[arg(long)]
    seed: u64,
    /// Output signal CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Optional directory for the ground-truth factor adjacency CSVs.
    #[arg(long)]
    truth_dir: Option<PathBuf>,
}

#[derive(Args)]
struct LearnArgs {
    /// Input signal CSV (header `# N=.. M=.. S=..`).
    #[arg(long)]
    signals: PathBuf,
    /// Expected physical graph size (validated against the file header).
    #[arg(long)]
    n: usize,
    /// Expected coupling graph size.
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long)]
    gamma1: f64,
    /// Estimation method: "nkd" or "unfold".
    #[arg(long, default_value = "nkd")]
    method: String,
    #[arg(long, default_value_t = 40.0)]
    rho: f64,
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    #[arg(long, default_value_t = 0.3)]
    thr_frac: f64,
    #[arg(long, default_value_t = 1e-7)]
    tol_abs: f64,
    #[arg(long, default_value_t = 1e-5)]
    tol_rel: f64,
    #[arg(long, default_value_t = 50000)]
    max_iter: usize,
    /// Output directory for learned matrices and reports.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CentralityArgs {
    #[arg(long)]
    signals: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long, default_value = "nkd")]
    method: String,
    /// How many central nodes to report.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output results CSV.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (defaults to the number of cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Use exact population covariances instead of sampled signals.
    #[arg(long)]
    exact_cov: bool,
    /// Override the binarization threshold fraction.
    #[arg(long)]
    thr_frac: Option<f64>,
    /// Override the fidelity weight.
    #[arg(long)]
    rho: Option<f64>,
    /// Override the diagonal bound.
    #[arg(long)]
    eps: Option<f64>,
    /// Override the base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Where to write per-trial wall times (not deterministic).
    #[arg(long)]
    timing_out: Option<PathBuf>,
}

#[derive(Args)]
struct AggregateArgs {
    /// Input results CSV.
    #[arg(long)]
    input: PathBuf,
    /// Output summary CSV.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0u8,
                _ => 1u8,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn run(cli: Cli) -> prodgraph::Result<()> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Learn(args) => learn(args),
        Command::Centrality(args) => centrality_cmd(args),
        Command::Experiment(args) => experiment(args),
        Command::Aggregate(args) => aggregate_cmd(args),
    }
}

fn build_filter(
    kind: &str,
    tau_scale: f64,
    gamma: Gamma,
    ai: &Graph,
) -> prodgraph::Result<FilterSpec> {
    let tau = tau_scale * max_degree_scale(ai);
    match kind {
        "exp" => Ok(FilterSpec::ExpInteraction { tau, gamma }),
        "inv" => Ok(FilterSpec::ResolventInteraction { tau, gamma }),
        "fj" => Ok(FilterSpec::FJKronecker),
        "diffusion" => Ok(FilterSpec::DiffusionCartesian),
        path => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Error::Invalid(format!(
                    "filter {path:?} is not a known kind or readable file: {e}"
                ))
            })?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Invalid(format!("bad filter JSON {path:?}: {e}")))
        }
    }
}

fn simulate(args: SimulateArgs) -> prodgraph::Result<()> {
    let gamma = Gamma::from_gamma1(args.gamma1)?;
    let mut rng = TrialRng::seed_from_u64(args.seed);
    let gg = match args.graph.as_str() {
        "er" => gen_erdos_renyi(args.n, args.er_p, &mut rng)?,
        "core-periphery" => {
            gen_core_periphery(args.n, args.core_size, args.p_cp, args.p_pp, &mut rng)?.0
        }
        other => return Err(Error::Invalid(format!("unknown graph family {other:?}"))),
    };
    let gc = gen_path(args.m)?;
    let ai = build_interaction(&InteractionGraphSpec::new(gc.clone(), gg.clone(), gamma));
    let spec = build_filter(&args.filter, args.tau_scale, gamma, &ai)?;
    let batch = synthesize(&spec, &gc, &gg, args.s, args.sigma2, &mut rng)?.with_seed(args.seed);
    write_batch(&batch, &args.out)?;
    if let Some(dir) = args.truth_dir {
        std::fs::create_dir_all(&dir)?;
        gg.write_dense(dir.join("ag_true.csv"))?;
        gc.write_dense(dir.join("ac_true.csv"))?;
        ai.write_dense(dir.join("ai_true.csv"))?;
    }
    eprintln!(
        "wrote {} samples of dimension {} to {}",
        args.s,
        args.n * args.m,
        args.out.display()
    );
    Ok(())
}

fn check_batch_dims(
    batch: &prodgraph::signals::SignalBatch,
    n: usize,
    m: usize,
) -> prodgraph::Result<()> {
    if batch.n() != n || batch.m() != m {
        return Err(Error::Shape {
            expected: format!("N={n} M={m}"),
            found: format!("N={} M={}", batch.n(), batch.m()),
        });
    }
    Ok(())
}

fn learn(args: LearnArgs) -> prodgraph::Result<()> {
    let batch = read_batch(&args.signals)?;
    check_batch_dims(&batch, args.n, args.m)?;
    let gamma = Gamma::from_gamma1(args.gamma1)?;
    let method: Method = args.method.parse()?;
    let opts = SolverOptions {
        tol_abs: args.tol_abs,
        tol_rel: args.tol_rel,
        max_iter: args.max_iter,
    };
    let outcome = harness::learn_from_batch(
        &batch,
        gamma,
        method,
        args.rho,
        args.eps,
        args.thr_frac,
        &opts,
    )?;
    std::fs::create_dir_all(&args.out_dir)?;
    let ac = Graph::from_adjacency(outcome.report_c.a_hat.clone())
        .unwrap_or_else(|_| panic!("solver output is symmetric"));
    let ag = Graph::from_adjacency(outcome.report_g.a_hat.clone())
        .unwrap_or_else(|_| panic!("solver output is symmetric"));
    ac.write_dense(args.out_dir.join("ac_hat.csv"))?;
    ag.write_dense(args.out_dir.join("ag_hat.csv"))?;
    outcome
        .ai_hat
        .write_dense(args.out_dir.join("ai_hat.csv"))?;
    Graph::from_adjacency(outcome.ai_binary.clone())
        .expect("binary support is symmetric")
        .write_dense(args.out_dir.join("ai_hat_binary.csv"))?;
    write_estimate(&outcome.estimate, &args.out_dir, "estimate")?;
    for (name, report) in [
        ("report_c.json", &outcome.report_c),
        ("report_g.json", &outcome.report_g),
    ] {
        let json = serde_json::to_string_pretty(&SolveReportJson::from(report))
            .map_err(|e| Error::Invalid(format!("report serialization: {e}")))?;
        std::fs::write(args.out_dir.join(name), json)?;
    }
    if !outcome.report_c.converged || !outcome.report_g.converged {
        return Err(Error::Numeric(format!(
            "solver did not converge (coupling: {}, physical: {})",
            outcome.report_c.converged, outcome.report_g.converged
        )));
    }
    eprintln!("wrote learned factors to {}", args.out_dir.display());
    Ok(())
}

#[derive(Serialize)]
struct CentralityJson {
    method: String,
    selected_index: usize,
    pos_score: f64,
    /// 1-based node ids, consistent with the graph CSV convention.
    top_nodes: Vec<usize>,
    cg: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cc: Option<Vec<f64>>,
}

fn centrality_cmd(args: CentralityArgs) -> prodgraph::Result<()> {
    let batch = read_batch(&args.signals)?;
    check_batch_dims(&batch, args.n, args.m)?;
    let method: Method = args.method.parse()?;
    let outcome = harness::centrality_from_batch(&batch, method, args.k)?;
    let json = CentralityJson {
        method: method.to_string(),
        selected_index: outcome.selected_index,
        pos_score: outcome.pos_score,
        top_nodes: outcome.top_nodes.iter().map(|i| i + 1).collect(),
        cg: outcome.cg,
        cc: outcome.cc,
    };
    let text = serde_json::to_string_pretty(&json)
        .map_err(|e| Error::Invalid(format!("serialization: {e}")))?;
    match args.out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn experiment(args: ExperimentArgs) -> prodgraph::Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Invalid(format!("bad config {}: {e}", args.config.display())))?;
    if args.exact_cov {
        cfg.exact_cov = true;
    }
    if let Some(thr) = args.thr_frac {
        cfg.thr_frac = thr;
    }
    if let Some(rho) = args.rho {
        cfg.rho = rho;
    }
    if let Some(eps) = args.eps {
        cfg.eps = eps;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let rows = match args.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Invalid(format!("thread pool: {e}")))?;
            pool.install(|| run_experiment(&cfg))?
        }
        None => run_experiment(&cfg)?,
    };
    write_results_csv(&rows, &args.out)?;
    if let Some(timing) = args.timing_out {
        write_timing_csv(&rows, timing)?;
    }
    eprintln!("wrote {} result rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn aggregate_cmd(args: AggregateArgs) -> prodgraph::Result<()> {
    let rows = read_results_csv(&args.input)?;
    let summary = aggregate(&rows);
    write_summary_csv(&summary, &args.out)?;
    eprintln!(
        "wrote {} summary rows to {}",
        summary.len(),
        args.out.display()
    );
    Ok(())
}
