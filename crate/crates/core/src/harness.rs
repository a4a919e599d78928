//! Experiment definitions, Monte-Carlo execution and result aggregation for
//! the synthetic topology-reconstruction and centrality-detection studies.
//!
//! Reproducibility contract: per-trial seeds derive deterministically from
//! `(base seed, experiment name, trial index)`, each trial owns its own
//! generator, and result rows are collected in job order, so a rerun with
//! the same config and seed is byte-identical regardless of thread count.
//! Because excitation and noise are drawn per sample, the first `k` samples
//! of a trial are shared across every batch size in `s_list` (paired
//! comparisons along the sample-size axis).

use nalgebra::DMatrix;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;

use crate::centrality;
use crate::error::{Error, Result};
use crate::filters::FilterSpec;
use crate::graph::{
    build_interaction, gen_core_periphery, gen_erdos_renyi, gen_path, max_degree_scale, sym_evd,
    Gamma, Graph, InteractionGraphSpec,
};
use crate::signals::{
    sample_covariances, synthesize, unfolded_from_full, CovarianceEstimate, SignalBatch,
};
use crate::spectral::{estimate_nkd, estimate_unfold, NkdOptions, SpectralEstimate};
use crate::topology::{
    binarize, f1_score, reconstruct_interaction, solve_spectemp, SolveReport, SolverOptions,
    SpecTempProblem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Nkd,
    Unfold,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Method::Nkd => write!(f, "nkd"),
            Method::Unfold => write!(f, "unfold"),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nkd" => Ok(Method::Nkd),
            "unfold" => Ok(Method::Unfold),
            other => Err(Error::Invalid(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    F1,
    ErrorRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentFilter {
    /// `exp(tau * A^I)` with `tau = tau_scale / max degree`.
    Exp,
    /// `(I - tau * A^I)^{-1}` with `tau = tau_scale / max degree`.
    Inv,
}

impl std::fmt::Display for ExperimentFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExperimentFilter::Exp => write!(f, "exp"),
            ExperimentFilter::Inv => write!(f, "inv"),
        }
    }
}

fn default_m() -> usize {
    3
}
fn default_sigma2() -> f64 {
    0.01
}
fn default_rho() -> f64 {
    40.0
}
fn default_eps() -> f64 {
    1e-6
}
fn default_thr_frac() -> f64 {
    0.3
}
fn default_er_p() -> f64 {
    0.4
}
fn default_core_size() -> usize {
    10
}
fn default_p_core_periphery() -> f64 {
    0.2
}
fn default_p_periphery() -> f64 {
    0.05
}

/// One synthetic experiment over a grid of graph and sample sizes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    /// First coupling parameter; the triple is `(g1, 2*g1, 1 - 3*g1)`.
    pub gamma1: f64,
    pub filter: ExperimentFilter,
    /// Multiplier on `1 / max degree`; defaults to 1, except 10 for the
    /// exponential filter in centrality experiments.
    #[serde(default)]
    pub tau_scale: Option<f64>,
    pub n_list: Vec<usize>,
    pub s_list: Vec<usize>,
    #[serde(default = "default_m")]
    pub m: usize,
    /// Defaults to 20 for topology runs and 100 for centrality runs.
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default = "default_sigma2")]
    pub sigma2: f64,
    pub seed: u64,
    pub method_list: Vec<Method>,
    pub metric: Metric,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_thr_frac")]
    pub thr_frac: f64,
    /// Extra binarization thresholds for sensitivity sweeps; each produces
    /// its own result rows.
    #[serde(default)]
    pub thr_sweep: Vec<f64>,
    #[serde(default)]
    pub solver: Option<SolverOptions>,
    /// Use the population covariance instead of sampled signals.
    #[serde(default)]
    pub exact_cov: bool,
    #[serde(default = "default_er_p")]
    pub er_p: f64,
    #[serde(default = "default_core_size")]
    pub core_size: usize,
    #[serde(default = "default_p_core_periphery")]
    pub p_core_periphery: f64,
    #[serde(default = "default_p_periphery")]
    pub p_periphery: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        Gamma::from_gamma1(self.gamma1)?;
        if self.n_list.is_empty() || self.s_list.is_empty() {
            return Err(Error::Invalid("n_list and s_list must be nonempty".into()));
        }
        if self.trials() == 0 {
            return Err(Error::Invalid("trials must be >= 1".into()));
        }
        if self.method_list.is_empty() {
            return Err(Error::Invalid("method_list must be nonempty".into()));
        }
        if self.m < 2 {
            return Err(Error::Invalid("need at least 2 layers".into()));
        }
        for thr in std::iter::once(&self.thr_frac).chain(self.thr_sweep.iter()) {
            if !(*thr > 0.0 && *thr < 1.0) {
                return Err(Error::Invalid(format!("threshold {thr} outside (0,1)")));
            }
        }
        if self.metric == Metric::ErrorRate {
            for &n in &self.n_list {
                if self.core_size >= n {
                    return Err(Error::InvalidPartition(format!(
                        "core size {} must be below n = {n}",
                        self.core_size
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(match self.metric {
            Metric::F1 => 20,
            Metric::ErrorRate => 100,
        })
    }

    pub fn tau_scale(&self) -> f64 {
        self.tau_scale.unwrap_or(match (self.metric, self.filter) {
            (Metric::ErrorRate, ExperimentFilter::Exp) => 10.0,
            _ => 1.0,
        })
    }

    pub fn solver_options(&self) -> SolverOptions {
        self.solver.clone().unwrap_or_default()
    }

    fn filter_spec(&self, tau: f64) -> Result<FilterSpec> {
        let gamma = Gamma::from_gamma1(self.gamma1)?;
        Ok(match self.filter {
            ExperimentFilter::Exp => FilterSpec::ExpInteraction { tau, gamma },
            ExperimentFilter::Inv => FilterSpec::ResolventInteraction { tau, gamma },
        })
    }
}

/// One metric value from one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub name: String,
    pub method: Method,
    pub filter: ExperimentFilter,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub gamma1: f64,
    pub thr_frac: f64,
    pub trial: usize,
    pub value: f64,
    /// Seconds spent on this (trial, method) unit; excluded from the
    /// deterministic results CSV and written to the timing sidecar instead.
    pub wall_time_s: f64,
}

/// Deterministic per-trial seed from the base seed, experiment name and
/// trial index (FNV-1a over the name, then a splitmix finalizer).
pub fn derive_trial_seed(base: u64, name: &str, trial: u64) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf29ce484222325;
    const FNV_PRIME: u64 = 0x100000001b3;
    let mut h = FNV_OFFSET;
    for b in name.as_bytes() {
        h = (h ^ (*b as u64)).wrapping_mul(FNV_PRIME);
    }
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(base).wrapping_add(h)).wrapping_add(trial.wrapping_mul(0x9E3779B97F4A7C15)))
}

/// 0/1 support of a matrix's off-diagonal entries. The tolerance absorbs
/// coupling weights that are zero up to round-off.
fn support(a: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.nrows();
    DMatrix::from_fn(d, d, |i, j| {
        if i != j && a[(i, j)].abs() > 1e-12 {
            1.0
        } else {
            0.0
        }
    })
}

fn covariances_for_trial(
    cfg: &ExperimentConfig,
    spec: &FilterSpec,
    gc: &Graph,
    gg: &Graph,
    s: usize,
    rng: &mut ChaCha12Rng,
) -> Result<CovarianceEstimate> {
    if cfg.exact_cov {
        let exact = crate::filters::exact_covariance(spec, gc, gg, cfg.sigma2)?;
        let (layer, node) = unfolded_from_full(&exact.cy, gg.n(), gc.n())?;
        Ok(CovarianceEstimate {
            full: exact.cy,
            layer,
            node,
            sample_count: 0,
        })
    } else {
        let batch = synthesize(spec, gc, gg, s, cfg.sigma2, rng)?;
        sample_covariances(&batch)
    }
}

fn estimate_bases(
    method: Method,
    covs: &CovarianceEstimate,
    n: usize,
    m: usize,
) -> Result<SpectralEstimate> {
    match method {
        Method::Nkd => estimate_nkd(&covs.full, n, m, &NkdOptions::default()),
        Method::Unfold => estimate_unfold(covs),
    }
}

/// Learned factor adjacencies for one (estimate, solver) pass.
fn solve_factors(
    est: &SpectralEstimate,
    rho: f64,
    eps: f64,
    opts: &SolverOptions,
) -> Result<(SolveReport, SolveReport)> {
    let pc = SpecTempProblem::new(est.vc.clone(), rho, eps)?;
    let pg = SpecTempProblem::new(est.vg.clone(), rho, eps)?;
    let rc = solve_spectemp(&pc, opts)?;
    let rg = solve_spectemp(&pg, opts)?;
    Ok((rc, rg))
}

/// F1 of the reassembled interaction support against the truth. Both factor
/// estimates are binarized at `thr`, reassembled with the known coupling
/// parameters, and compared with the true interaction support.
fn score_f1(
    report_c: &SolveReport,
    report_g: &SolveReport,
    gamma: Gamma,
    thr: f64,
    truth_support: &DMatrix<f64>,
) -> Result<f64> {
    let bc = binarize(&report_c.a_hat, thr)?;
    let bg = binarize(&report_g.a_hat, thr)?;
    let recon = reconstruct_interaction(&bc, &bg, gamma)?;
    f1_score(&support(recon.adj()), truth_support)
}

fn run_topology_trial(
    cfg: &ExperimentConfig,
    n: usize,
    s: usize,
    trial: usize,
) -> Result<Vec<ResultRow>> {
    let gamma = Gamma::from_gamma1(cfg.gamma1)?;
    let seed = derive_trial_seed(cfg.seed, &cfg.name, trial as u64);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let gg = gen_erdos_renyi(n, cfg.er_p, &mut rng)?;
    let gc = gen_path(cfg.m)?;
    let ai = build_interaction(&InteractionGraphSpec::new(gc.clone(), gg.clone(), gamma));
    let tau = cfg.tau_scale() * max_degree_scale(&ai);
    let spec = cfg.filter_spec(tau)?;
    let truth_support = support(ai.adj());
    let covs = covariances_for_trial(cfg, &spec, &gc, &gg, s, &mut rng)?;

    let mut rows = Vec::new();
    for &method in &cfg.method_list {
        let t0 = Instant::now();
        let est = estimate_bases(method, &covs, n, cfg.m)?;
        let (rc, rg) = solve_factors(&est, cfg.rho, cfg.eps, &cfg.solver_options())?;
        let mut thresholds = vec![cfg.thr_frac];
        thresholds.extend(cfg.thr_sweep.iter().cloned());
        let wall = t0.elapsed().as_secs_f64();
        for thr in thresholds {
            let value = score_f1(&rc, &rg, gamma, thr, &truth_support)?;
            rows.push(ResultRow {
                name: cfg.name.clone(),
                method,
                filter: cfg.filter,
                n,
                m: cfg.m,
                s,
                gamma1: cfg.gamma1,
                thr_frac: thr,
                trial,
                value,
                wall_time_s: wall,
            });
        }
    }
    Ok(rows)
}

fn run_centrality_trial(
    cfg: &ExperimentConfig,
    n: usize,
    s: usize,
    trial: usize,
) -> Result<Vec<ResultRow>> {
    let gamma = Gamma::from_gamma1(cfg.gamma1)?;
    let seed = derive_trial_seed(cfg.seed, &cfg.name, trial as u64);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let (gg, core) = gen_core_periphery(
        n,
        cfg.core_size,
        cfg.p_core_periphery,
        cfg.p_periphery,
        &mut rng,
    )?;
    let gc = gen_path(cfg.m)?;
    let ai = build_interaction(&InteractionGraphSpec::new(gc.clone(), gg.clone(), gamma));
    let tau = cfg.tau_scale() * max_degree_scale(&ai);
    let spec = cfg.filter_spec(tau)?;
    let covs = covariances_for_trial(cfg, &spec, &gc, &gg, s, &mut rng)?;

    let mut rows = Vec::new();
    for &method in &cfg.method_list {
        let t0 = Instant::now();
        let cg = match method {
            Method::Nkd => {
                let evd = sym_evd(&covs.full)?;
                centrality::detect_centrality(&evd.vectors, n, cfg.m)?.cg
            }
            Method::Unfold => {
                let evd = sym_evd(&covs.node)?;
                let (idx, _) = centrality::select_positive_column(&evd.vectors)?;
                centrality::sign_normalize(&evd.vectors.column(idx).into_owned())
            }
        };
        let detected = centrality::topk(&cg, cfg.core_size)?;
        let value = centrality::detection_error_rate(&detected, &core)?;
        rows.push(ResultRow {
            name: cfg.name.clone(),
            method,
            filter: cfg.filter,
            n,
            m: cfg.m,
            s,
            gamma1: cfg.gamma1,
            thr_frac: cfg.thr_frac,
            trial,
            value,
            wall_time_s: t0.elapsed().as_secs_f64(),
        });
    }
    Ok(rows)
}

/// Runs the full grid of an experiment. Trials execute in parallel on the
/// current rayon pool; rows come back in deterministic job order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut jobs: Vec<(usize, usize, usize)> = Vec::new();
    for &n in &cfg.n_list {
        for &s in &cfg.s_list {
            for trial in 0..cfg.trials() {
                jobs.push((n, s, trial));
            }
        }
    }
    let results: Vec<Result<Vec<ResultRow>>> = jobs
        .par_iter()
        .map(|&(n, s, trial)| match cfg.metric {
            Metric::F1 => run_topology_trial(cfg, n, s, trial),
            Metric::ErrorRate => run_centrality_trial(cfg, n, s, trial),
        })
        .collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Aggregated statistics for one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub method: Method,
    pub filter: ExperimentFilter,
    pub n: usize,
    pub m: usize,
    pub s: usize,
    pub gamma1: f64,
    pub thr_frac: f64,
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
}

/// Groups rows by (name, method, filter, n, m, s, gamma1, threshold) and
/// reports mean, sample standard deviation and trial count, in stable
/// sorted order.
pub fn aggregate(rows: &[ResultRow]) -> Vec<SummaryRow> {
    use std::collections::BTreeMap;
    // bit-pattern keys keep float grouping exact
    type GroupKey = (String, String, String, usize, usize, usize, u64, u64);
    let mut groups: BTreeMap<GroupKey, Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((
                r.name.clone(),
                r.method.to_string(),
                r.filter.to_string(),
                r.n,
                r.m,
                r.s,
                r.gamma1.to_bits(),
                r.thr_frac.to_bits(),
            ))
            .or_default()
            .push(r.value);
    }
    groups
        .into_iter()
        .map(
            |((name, method, filter, n, m, s, g_bits, t_bits), values)| {
                let count = values.len();
                let mean = values.iter().sum::<f64>() / count as f64;
                let sd = if count > 1 {
                    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                        / (count - 1) as f64)
                        .sqrt()
                } else {
                    0.0
                };
                SummaryRow {
                    name,
                    method: if method == "nkd" {
                        Method::Nkd
                    } else {
                        Method::Unfold
                    },
                    filter: if filter == "exp" {
                        ExperimentFilter::Exp
                    } else {
                        ExperimentFilter::Inv
                    },
                    n,
                    m,
                    s,
                    gamma1: f64::from_bits(g_bits),
                    thr_frac: f64::from_bits(t_bits),
                    count,
                    mean,
                    sd,
                }
            },
        )
        .collect()
}

const RESULTS_HEADER: &str = "name,method,filter,n,m,s,gamma1,thr_frac,trial,value";

/// Writes the deterministic results CSV (no timing information).
pub fn write_results_csv<P: AsRef<Path>>(rows: &[ResultRow], path: P) -> Result<()> {
    let mut out = String::from(RESULTS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.name, r.method, r.filter, r.n, r.m, r.s, r.gamma1, r.thr_frac, r.trial, r.value
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Writes wall times for the same rows; this file is not deterministic.
pub fn write_timing_csv<P: AsRef<Path>>(rows: &[ResultRow], path: P) -> Result<()> {
    let mut out = String::from("name,method,n,m,s,trial,wall_time_s\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.name, r.method, r.n, r.m, r.s, r.trial, r.wall_time_s
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a results CSV written by [`write_results_csv`].
pub fn read_results_csv<P: AsRef<Path>>(path: P) -> Result<Vec<ResultRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || (lineno == 0 && line == RESULTS_HEADER) {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 10 {
            return Err(Error::Parse {
                line: lineno + 1,
                msg: format!("expected 10 columns, found {}", cells.len()),
            });
        }
        let parse_err = |what: &str| Error::Parse {
            line: lineno + 1,
            msg: format!("bad {what}"),
        };
        let filter = match cells[2] {
            "exp" => ExperimentFilter::Exp,
            "inv" => ExperimentFilter::Inv,
            other => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("unknown filter {other:?}"),
                })
            }
        };
        rows.push(ResultRow {
            name: cells[0].to_string(),
            method: cells[1].parse()?,
            filter,
            n: cells[3].parse().map_err(|_| parse_err("n"))?,
            m: cells[4].parse().map_err(|_| parse_err("m"))?,
            s: cells[5].parse().map_err(|_| parse_err("s"))?,
            gamma1: cells[6].parse().map_err(|_| parse_err("gamma1"))?,
            thr_frac: cells[7].parse().map_err(|_| parse_err("thr_frac"))?,
            trial: cells[8].parse().map_err(|_| parse_err("trial"))?,
            value: cells[9].parse().map_err(|_| parse_err("value"))?,
            wall_time_s: 0.0,
        });
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 0,
            msg: "no result rows".into(),
        });
    }
    Ok(rows)
}

/// Writes aggregated summaries as CSV.
pub fn write_summary_csv<P: AsRef<Path>>(rows: &[SummaryRow], path: P) -> Result<()> {
    let mut out = String::from("name,method,filter,n,m,s,gamma1,thr_frac,count,mean,sd\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.name, r.method, r.filter, r.n, r.m, r.s, r.gamma1, r.thr_frac, r.count, r.mean, r.sd
        );
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Everything produced by one learning pass over a signal batch.
pub struct LearnOutcome {
    pub estimate: SpectralEstimate,
    pub report_c: SolveReport,
    pub report_g: SolveReport,
    /// Weighted interaction reassembled from the learned factors.
    pub ai_hat: Graph,
    /// Support of the reassembly of the binarized factors.
    pub ai_binary: DMatrix<f64>,
}

/// Runs the full pipeline (covariances, basis estimation, factor solves,
/// reassembly) on an externally provided batch. No preprocessing happens
/// here: signals are consumed as stored.
pub fn learn_from_batch(
    batch: &SignalBatch,
    gamma: Gamma,
    method: Method,
    rho: f64,
    eps: f64,
    thr_frac: f64,
    opts: &SolverOptions,
) -> Result<LearnOutcome> {
    let covs = sample_covariances(batch)?;
    let est = estimate_bases(method, &covs, batch.n(), batch.m())?;
    let (report_c, report_g) = solve_factors(&est, rho, eps, opts)?;
    let ai_hat = reconstruct_interaction(&report_c.a_hat, &report_g.a_hat, gamma)?;
    let bc = binarize(&report_c.a_hat, thr_frac)?;
    let bg = binarize(&report_g.a_hat, thr_frac)?;
    let ai_binary = support(reconstruct_interaction(&bc, &bg, gamma)?.adj());
    Ok(LearnOutcome {
        estimate: est,
        report_c,
        report_g,
        ai_hat,
        ai_binary,
    })
}

/// Centrality detection outcome on a signal batch.
pub struct CentralityOutcome {
    /// Index of the selected eigenvector within its eigenbasis.
    pub selected_index: usize,
    pub pos_score: f64,
    /// Unit physical centrality vector, nonnegative orientation.
    pub cg: Vec<f64>,
    /// Coupling centrality (only available for the NKD method).
    pub cc: Option<Vec<f64>>,
    /// 0-based indices of the detected top-k nodes, ascending.
    pub top_nodes: Vec<usize>,
}

/// Detects the top-k central physical nodes from a signal batch.
pub fn centrality_from_batch(
    batch: &SignalBatch,
    method: Method,
    k: usize,
) -> Result<CentralityOutcome> {
    let covs = sample_covariances(batch)?;
    match method {
        Method::Nkd => {
            let evd = sym_evd(&covs.full)?;
            let res = centrality::detect_centrality(&evd.vectors, batch.n(), batch.m())?;
            let top_nodes = centrality::topk(&res.cg, k)?;
            Ok(CentralityOutcome {
                selected_index: res.selected_index,
                pos_score: res.pos_score,
                cg: res.cg.iter().cloned().collect(),
                cc: Some(res.cc.iter().cloned().collect()),
                top_nodes,
            })
        }
        Method::Unfold => {
            let evd = sym_evd(&covs.node)?;
            let (idx, score) = centrality::select_positive_column(&evd.vectors)?;
            let cg = centrality::sign_normalize(&evd.vectors.column(idx).into_owned());
            let top_nodes = centrality::topk(&cg, k)?;
            Ok(CentralityOutcome {
                selected_index: idx,
                pos_score: score,
                cg: cg.iter().cloned().collect(),
                cc: None,
                top_nodes,
            })
        }
    }
}
