//! Empirical MSE benchmarks across strategies and environments.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocator::{round_allocation, solve_relaxed};
use crate::dcs::DcsCumulative;
use crate::envs::{EnvKind, Rollout};
use crate::error::{Error, Result};
use crate::estimator::{deterministic_variance, SurrogateCoefficients};
use crate::rido::{run_fixed, run_rido, RidoConfig, TrajectorySource};
use crate::rng::derive_seed;
use crate::schedules::{robust_dcs, robust_weights, uniform_dcs};

/// Simulated ground truth uses this many full-length trajectories by default.
pub const DEFAULT_GROUND_TRUTH_COUNT: usize = 1000;
pub const DEFAULT_RUNS: usize = 100;

// Child-seed slot reserved for the ground-truth simulation; replications use
// slots 0..runs.
const GROUND_TRUTH_SLOT: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Uniform,
    Robust,
    Rido,
    /// Optimal deterministic schedule computed from exact moments.
    Oracle,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Uniform => "uniform",
            Strategy::Robust => "robust",
            Strategy::Rido => "rido",
            Strategy::Oracle => "oracle",
        }
    }

    /// The pre-determined schedule, or `None` for the adaptive strategy.
    pub fn fixed_schedule(self, task: &dyn Rollout, budget: u64) -> Result<Option<DcsCumulative>> {
        let horizon = task.horizon();
        Ok(match self {
            Strategy::Uniform => Some(uniform_dcs(budget, horizon)?),
            Strategy::Robust => Some(robust_dcs(budget, horizon, task.gamma())?.dcs),
            Strategy::Oracle => {
                let f = task.exact_surrogate().ok_or_else(|| {
                    Error::ConfigInvalid(format!("{} has no closed-form moments", task.name()))
                })?;
                Some(optimal_dcs(&f, budget)?)
            }
            Strategy::Rido => None,
        })
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Strategy::Uniform),
            "robust" => Ok(Strategy::Robust),
            "rido" => Ok(Strategy::Rido),
            "oracle" => Ok(Strategy::Oracle),
            _ => Err(Error::ConfigInvalid(format!(
                "unknown strategy `{s}` (expected uniform, robust, rido or oracle)"
            ))),
        }
    }
}

/// Integer schedule minimizing `sum f_t / n_t`: the relaxed optimum, rounded.
pub fn optimal_dcs(f: &SurrogateCoefficients, budget: u64) -> Result<DcsCumulative> {
    round_allocation(&solve_relaxed(f, budget)?, budget)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub batch: u64,
    pub beta: f64,
    pub ground_truth_count: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            batch: 1000,
            beta: 1.0,
            ground_truth_count: DEFAULT_GROUND_TRUTH_COUNT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchResult {
    pub strategy: Strategy,
    pub env: String,
    pub budget: u64,
    pub gamma: f64,
    pub horizon: usize,
    pub batch: u64,
    pub beta: f64,
    pub runs: usize,
    pub truth: f64,
    pub estimates: Vec<f64>,
    pub squared_errors: Vec<f64>,
    pub mse: f64,
    /// Normal-approximation 95% half-width of the MSE.
    pub ci95: f64,
    /// Per-timestep sample counts averaged over replications.
    pub mean_allocation: Vec<f64>,
    pub seconds: f64,
}

/// Expected return used as the reference for squared errors.
///
/// Closed-form when the task knows its expected rewards, otherwise the mean
/// discounted return of `count` full-length rollouts.
pub fn ground_truth(task: &dyn Rollout, count: usize, seed: u64) -> Result<f64> {
    if let Some(j) = task.exact_return() {
        return Ok(j);
    }
    if count == 0 {
        return Err(Error::ConfigInvalid("ground-truth count must be positive".into()));
    }
    let n = uniform_dcs(count as u64 * task.horizon() as u64, task.horizon())?;
    Ok(run_fixed(task, &n, seed)?.1)
}

/// `R` independent replications of one strategy, scored against the ground truth.
///
/// Replication `r` draws from child seed `r`, so results do not depend on
/// how the worker pool schedules them.
pub fn evaluate_strategy(
    task: &dyn Rollout,
    strategy: Strategy,
    budget: u64,
    runs: usize,
    cfg: &BenchConfig,
    seed: u64,
) -> Result<BenchResult> {
    if runs == 0 {
        return Err(Error::ConfigInvalid("runs must be positive".into()));
    }
    let started = Instant::now();
    let truth = ground_truth(task, cfg.ground_truth_count, derive_seed(seed, GROUND_TRUTH_SLOT))?;
    let schedule = strategy.fixed_schedule(task, budget)?;
    if schedule.is_none() {
        RidoConfig::new(budget, cfg.batch, cfg.beta, seed).validate(task.horizon())?;
    }

    let outcomes: Vec<(f64, DcsCumulative)> = (0..runs as u64)
        .into_par_iter()
        .map(|r| {
            let rep_seed = derive_seed(seed, r);
            match &schedule {
                Some(n) => run_fixed(task, n, rep_seed).map(|(_, est)| (est, n.clone())),
                None => {
                    let cfg = RidoConfig::new(budget, cfg.batch, cfg.beta, rep_seed);
                    run_rido(task, &cfg).map(|tr| (tr.estimate, tr.cumulative))
                }
            }
        })
        .collect::<Result<_>>()?;

    let horizon = task.horizon();
    let estimates: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let squared_errors: Vec<f64> = estimates.iter().map(|e| (e - truth).powi(2)).collect();
    let (mse, ci95) = mean_ci95(&squared_errors);
    let mut mean_allocation = vec![0.0; horizon];
    for (_, n) in &outcomes {
        for (acc, &c) in mean_allocation.iter_mut().zip(n.as_slice()) {
            *acc += c as f64;
        }
    }
    mean_allocation.iter_mut().for_each(|x| *x /= runs as f64);

    Ok(BenchResult {
        strategy,
        env: task.name().to_string(),
        budget,
        gamma: task.gamma(),
        horizon,
        batch: cfg.batch,
        beta: cfg.beta,
        runs,
        truth,
        estimates,
        squared_errors,
        mse,
        ci95,
        mean_allocation,
        seconds: started.elapsed().as_secs_f64(),
    })
}

/// Sample mean and its normal-approximation 95% half-width.
pub fn mean_ci95(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::INFINITY);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * (var / n).sqrt())
}

// ---------------------------------------------------------------------------
// Analytic sub-optimality of the pre-determined schedules

/// One `(T, gamma, budget)` point of the sub-optimality sweep, for a
/// surrogate with `f_0 = 1` and zeros elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct PropositionRow {
    pub horizon: usize,
    pub gamma: f64,
    pub budget: u64,
    /// Variance of the uniform schedule over that of the optimal one.
    pub uniform_ratio: f64,
    /// `T (budget - T + 1) / budget`.
    pub uniform_ratio_closed_form: f64,
    /// Variance of the robust schedule over that of the optimal one.
    pub robust_ratio: f64,
    /// `(1/2) sum_t sqrt(d_t) / sqrt(d_0)`.
    pub robust_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropositionReport {
    pub rows: Vec<PropositionRow>,
}

impl PropositionReport {
    /// Both ratios grow with `T` at every fixed `(gamma, budget)`.
    pub fn grows_with_horizon(&self) -> bool {
        let mut rows: Vec<&PropositionRow> = self.rows.iter().collect();
        rows.sort_by(|a, b| {
            (a.budget, a.gamma.to_bits(), a.horizon).cmp(&(b.budget, b.gamma.to_bits(), b.horizon))
        });
        rows.windows(2)
            .filter(|w| w[0].budget == w[1].budget && w[0].gamma == w[1].gamma)
            .all(|w| {
                w[1].uniform_ratio > w[0].uniform_ratio && w[1].robust_bound > w[0].robust_bound
            })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "T",
            "gamma",
            "lambda",
            "uniform_ratio",
            "uniform_ratio_closed_form",
            "robust_ratio",
            "robust_bound",
        ])
        .map_err(io_err)?;
        for r in &self.rows {
            w.write_record([
                r.horizon.to_string(),
                r.gamma.to_string(),
                r.budget.to_string(),
                r.uniform_ratio.to_string(),
                r.uniform_ratio_closed_form.to_string(),
                r.robust_ratio.to_string(),
                r.robust_bound.to_string(),
            ])
            .map_err(io_err)?;
        }
        w.flush().map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        Ok(())
    }
}

pub fn proposition_row(horizon: usize, gamma: f64, budget: u64) -> Result<PropositionRow> {
    let mut f = vec![0.0; horizon];
    f[0] = 1.0;
    let f = SurrogateCoefficients::new(f);
    let optimal = deterministic_variance(&f, &optimal_dcs(&f, budget)?)?;
    let uniform = deterministic_variance(&f, &uniform_dcs(budget, horizon)?)?;
    let robust = deterministic_variance(&f, &robust_dcs(budget, horizon, gamma)?.dcs)?;
    let d = robust_weights(gamma, horizon)?;
    let roots: f64 = d.as_slice().iter().map(|x| x.sqrt()).sum();
    let t = horizon as f64;
    let b = budget as f64;
    Ok(PropositionRow {
        horizon,
        gamma,
        budget,
        uniform_ratio: uniform / optimal,
        uniform_ratio_closed_form: t * (b - t + 1.0) / b,
        robust_ratio: robust / optimal,
        robust_bound: 0.5 * roots / d.as_slice()[0].sqrt(),
    })
}

/// Sweep over `T in {2, 4, 5, 10, 20, 25, 50}`, `gamma in {0.5, 0.9, 0.99}`,
/// `budget in {10^4, 10^5}`.
pub fn proposition_checks() -> Result<PropositionReport> {
    let mut rows = Vec::new();
    for &budget in &[10_000u64, 100_000] {
        for &gamma in &[0.5, 0.9, 0.99] {
            for &horizon in &[2usize, 4, 5, 10, 20, 25, 50] {
                rows.push(proposition_row(horizon, gamma, budget)?);
            }
        }
    }
    Ok(PropositionReport { rows })
}

// ---------------------------------------------------------------------------
// CSV output and declarative sweeps

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    env: &'a str,
    strategy: &'a str,
    lambda: u64,
    gamma: f64,
    #[serde(rename = "T")]
    horizon: usize,
    b: u64,
    beta: f64,
    runs: usize,
    mse: f64,
    ci95: f64,
    seconds: f64,
}

fn io_err(e: csv::Error) -> Error {
    Error::ConfigInvalid(format!("csv: {e}"))
}

/// Writes one row per result. With `timing` off the `seconds` column is 0,
/// making the file a pure function of the configuration and seed.
pub fn write_results_csv<W: Write>(results: &[BenchResult], out: W, timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in results {
        w.serialize(CsvRow {
            env: &r.env,
            strategy: r.strategy.name(),
            lambda: r.budget,
            gamma: r.gamma,
            horizon: r.horizon,
            b: r.batch,
            beta: r.beta,
            runs: r.runs,
            mse: r.mse,
            ci95: r.ci95,
            seconds: if timing { r.seconds } else { 0.0 },
        })
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::ConfigInvalid(e.to_string()))?;
    Ok(())
}

/// One row per phase: `phase, t0, ..., t{T-1}`.
pub fn write_trace_csv<W: Write>(phases: &[DcsCumulative], out: W) -> Result<()> {
    let horizon = phases.first().map_or(0, DcsCumulative::horizon);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["phase".to_string()];
    header.extend((0..horizon).map(|t| format!("t{t}")));
    w.write_record(&header).map_err(io_err)?;
    for (i, p) in phases.iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(p.as_slice().iter().map(u64::to_string));
        w.write_record(&rec).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::ConfigInvalid(e.to_string()))?;
    Ok(())
}

fn default_runs() -> usize {
    DEFAULT_RUNS
}
fn default_true() -> bool {
    true
}
fn default_beta() -> f64 {
    1.0
}
fn default_gt_count() -> usize {
    DEFAULT_GROUND_TRUTH_COUNT
}

/// Declarative multi-run specification, typically read from TOML.
///
/// ```toml
/// seed = 7
/// runs = 100
///
/// [[experiment]]
/// env = "lqg"
/// strategies = ["uniform", "robust", "rido"]
/// lambdas = [5000, 10000]
/// gammas = [0.99, 0.9]
/// batch = 500
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default = "default_true")]
    pub timing: bool,
    #[serde(default = "default_gt_count")]
    pub ground_truth_count: usize,
    #[serde(rename = "experiment")]
    pub experiments: Vec<SweepExperiment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepExperiment {
    pub env: String,
    pub strategies: Vec<Strategy>,
    pub lambdas: Vec<u64>,
    pub gammas: Vec<f64>,
    pub batch: u64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub horizon: Option<usize>,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))
    }

    /// Checks every combination before any simulation starts.
    pub fn validate(&self) -> Result<()> {
        if self.experiments.is_empty() {
            return Err(Error::ConfigInvalid("sweep has no experiments".into()));
        }
        for e in &self.experiments {
            let kind: EnvKind = e.env.parse()?;
            let horizon = e.horizon.unwrap_or(kind.default_horizon());
            for &gamma in &e.gammas {
                let task = kind.task(gamma, Some(horizon))?;
                for &lambda in &e.lambdas {
                    for &s in &e.strategies {
                        match s.fixed_schedule(task.as_ref(), lambda)? {
                            Some(_) => {}
                            None => RidoConfig::new(lambda, e.batch, e.beta, self.seed)
                                .validate(horizon)?,
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn run(&self) -> Result<Vec<BenchResult>> {
        self.validate()?;
        let mut results = Vec::new();
        for e in &self.experiments {
            let kind: EnvKind = e.env.parse()?;
            let cfg = BenchConfig {
                batch: e.batch,
                beta: e.beta,
                ground_truth_count: self.ground_truth_count,
            };
            for &gamma in &e.gammas {
                let task = kind.task(gamma, e.horizon)?;
                for &lambda in &e.lambdas {
                    for &s in &e.strategies {
                        results.push(evaluate_strategy(
                            task.as_ref(),
                            s,
                            lambda,
                            self.runs,
                            &cfg,
                            self.seed,
                        )?);
                    }
                }
            }
        }
        Ok(results)
    }
}

/// Per-phase schedules of one adaptive run.
pub fn rido_trace(task: &dyn Rollout, cfg: &RidoConfig) -> Result<Vec<DcsCumulative>> {
    Ok(run_rido(task, cfg)?.phases)
}

/// Full-length discounted returns of `count` rollouts; used for quick
/// sanity checks of simulated environments.
pub fn sample_returns(task: &dyn Rollout, count: usize, seed: u64) -> Vec<f64> {
    let horizon = task.horizon();
    let n = uniform_dcs(count as u64 * horizon as u64, horizon).expect("divisible by construction");
    let data = TrajectorySource::new(seed, horizon).collect(task, &n.to_counts());
    let gamma = task.gamma();
    data.trajectories()
        .iter()
        .map(|tr| {
            let mut g = 1.0;
            tr.iter()
                .map(|r| {
                    let x = g * r;
                    g *= gamma;
                    x
                })
                .sum()
        })
        .collect()
}
