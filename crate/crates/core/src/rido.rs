//! Adaptive data collection in mini-batches.
//!
//! The budget is split into `K = budget / batch` phases. Phase 0 collects
//! `batch / T` full-length trajectories; every later phase re-estimates the
//! reward moments from all data gathered so far, inflates them with
//! exploration bonuses, and spends its batch on the schedule minimizing the
//! resulting variance surrogate.

use serde::{Deserialize, Serialize};

use crate::allocator::{
    compute_bonuses, empirical_surrogate, group_partition, round_allocation, solve_grouped,
    Partition,
};
use crate::dcs::{validate_budget, DcsCounts, DcsCumulative};
use crate::envs::Rollout;
use crate::error::{Error, Result};
use crate::estimator::{estimate_return, RewardDataset};
use crate::rng::trajectory_rng;
use crate::schedules::uniform_dcs;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidoConfig {
    pub budget: u64,
    pub batch: u64,
    pub beta: f64,
    pub seed: u64,
}

impl RidoConfig {
    pub fn new(budget: u64, batch: u64, beta: f64, seed: u64) -> Self {
        RidoConfig {
            budget,
            batch,
            beta,
            seed,
        }
    }

    pub fn phases(&self) -> u64 {
        self.budget / self.batch
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        let t = horizon as u64;
        let fail = |msg: String| Err(Error::ConfigInvalid(msg));
        if self.batch == 0 || self.batch % t != 0 {
            return fail(format!("batch {} must be a positive multiple of the horizon {t}", self.batch));
        }
        if self.batch < 2 * t {
            return fail(format!("batch {} must be at least twice the horizon {t}", self.batch));
        }
        if self.budget == 0 || self.budget % self.batch != 0 {
            return fail(format!(
                "budget {} must be a positive multiple of the batch {}",
                self.budget, self.batch
            ));
        }
        if !(self.beta >= 1.0) {
            return Err(Error::InvalidBeta(self.beta));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RidoTrace {
    pub phases: Vec<DcsCumulative>,
    pub dataset: RewardDataset,
    pub cumulative: DcsCumulative,
    pub estimate: f64,
    /// Phases whose surrogate was ill-conditioned from step 0 and were spent
    /// uniformly.
    pub uniform_fallbacks: usize,
}

/// Hands out trajectories with per-length random streams.
#[derive(Debug, Clone)]
pub struct TrajectorySource {
    seed: u64,
    next_ordinal: Vec<u64>,
}

impl TrajectorySource {
    pub fn new(seed: u64, horizon: usize) -> Self {
        TrajectorySource {
            seed,
            next_ordinal: vec![0; horizon + 1],
        }
    }

    /// Rolls out `m_h` trajectories of each length `h`.
    pub fn collect(&mut self, task: &dyn Rollout, counts: &DcsCounts) -> RewardDataset {
        let mut data = RewardDataset::new(task.horizon());
        for h in (1..=counts.horizon()).rev() {
            for _ in 0..counts.trajectories_of_length(h) {
                let ordinal = self.next_ordinal[h];
                self.next_ordinal[h] += 1;
                let mut rng = trajectory_rng(self.seed, h, ordinal);
                data.push(task.sample_rewards(h, &mut rng));
            }
        }
        data
    }
}

/// Runs a pre-determined schedule and returns the data and the estimate.
pub fn run_fixed(task: &dyn Rollout, n: &DcsCumulative, seed: u64) -> Result<(RewardDataset, f64)> {
    if n.horizon() != task.horizon() {
        return Err(Error::ConfigInvalid(format!(
            "schedule horizon {} differs from task horizon {}",
            n.horizon(),
            task.horizon()
        )));
    }
    if !validate_budget(n.as_slice(), n.total()) {
        return Err(Error::ZeroAllocation {
            index: n.horizon() - 1,
        });
    }
    let data = TrajectorySource::new(seed, task.horizon()).collect(task, &n.to_counts());
    let estimate = estimate_return(&data, n, task.gamma())?;
    Ok((data, estimate))
}

/// Schedule for the next mini-batch given everything collected so far.
pub fn next_phase_dcs(
    data: &RewardDataset,
    batch: u64,
    beta: f64,
    gamma: f64,
) -> Result<(DcsCumulative, bool)> {
    let horizon = data.horizon();
    let moments = data.moments();
    let bonuses = compute_bonuses(&moments.counts, beta)?;
    let f = empirical_surrogate(&moments.stds, &moments.covariances, &bonuses, gamma);
    match group_partition(&f, batch) {
        Partition::UniformFallback => Ok((uniform_dcs(batch, horizon)?, true)),
        Partition::Grouped(problem) => {
            let cont = solve_grouped(&problem)?;
            Ok((round_allocation(&cont, batch)?, false))
        }
    }
}

pub fn run_rido(task: &dyn Rollout, cfg: &RidoConfig) -> Result<RidoTrace> {
    let horizon = task.horizon();
    cfg.validate(horizon)?;
    let gamma = task.gamma();
    let mut source = TrajectorySource::new(cfg.seed, horizon);

    let first = uniform_dcs(cfg.batch, horizon)?;
    let mut dataset = source.collect(task, &first.to_counts());
    let mut cumulative = first.clone();
    let mut phases = vec![first];
    let mut uniform_fallbacks = 0;

    for _ in 1..cfg.phases() {
        let (dcs, fell_back) = next_phase_dcs(&dataset, cfg.batch, cfg.beta, gamma)?;
        debug_assert!(validate_budget(dcs.as_slice(), cfg.batch));
        uniform_fallbacks += usize::from(fell_back);
        dataset.extend(source.collect(task, &dcs.to_counts()));
        cumulative = cumulative.add(&dcs);
        phases.push(dcs);
    }

    let estimate = estimate_return(&dataset, &cumulative, gamma)?;
    Ok(RidoTrace {
        phases,
        dataset,
        cumulative,
        estimate,
        uniform_fallbacks,
    })
}
