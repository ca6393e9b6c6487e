//! Monte Carlo policy evaluation under a fixed transition budget.
//!
//! Trajectories may be truncated: a data collection strategy decides how
//! many rollouts of each length to gather, and the return is estimated by
//! per-timestep sample means. The crate provides the estimator and its
//! variance, fixed schedules (uniform and robust), the constrained
//! allocation solver, the adaptive mini-batch procedure, evaluation
//! environments and benchmarking utilities.

pub mod allocator;
pub mod bench;
pub mod dcs;
pub mod envs;
pub mod error;
pub mod estimator;
pub mod rido;
pub mod rng;
pub mod schedules;

pub use allocator::{
    brute_force_oracle, compute_bonuses, empirical_surrogate, group_partition, round_allocation,
    solve_grouped, solve_relaxed, ContinuousAllocation, ExplorationBonuses, Partition,
};
pub use bench::{evaluate_strategy, ground_truth, BenchConfig, BenchResult, Strategy, SweepConfig};
pub use dcs::{counts_from_cumulative, cumulative_from_counts, validate_budget, DcsCounts, DcsCumulative};
pub use envs::{EnvKind, Rollout};
pub use error::{Error, Result};
pub use estimator::{
    deterministic_variance, empirical_cov, empirical_std, estimate_return, exact_surrogate,
    hoeffding_width, RewardDataset, SurrogateCoefficients,
};
pub use rido::{run_fixed, run_rido, RidoConfig, RidoTrace};
pub use schedules::{robust_dcs, robust_weights, uniform_dcs};
