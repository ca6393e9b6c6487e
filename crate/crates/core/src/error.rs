use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("sample counts must be non-increasing, but n[{index}] < n[{}]", index + 1)]
    MonotonicityViolation { index: usize },

    #[error("dataset has {found} samples at timestep {timestep}, schedule expects {expected}")]
    InconsistentDataset {
        timestep: usize,
        expected: u64,
        found: u64,
    },

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("invalid reward moments: {0}")]
    InvalidMoments(String),

    #[error("timestep {index} has no samples allocated")]
    ZeroAllocation { index: usize },

    #[error("discount {0} is not supported here (requires gamma < 1)")]
    UnsupportedDiscount(f64),

    #[error("budget {budget} is not a multiple of horizon {horizon}")]
    IndivisibleBudget { budget: u64, horizon: usize },

    #[error("robustness level beta must be >= 1, got {0}")]
    InvalidBeta(f64),

    #[error("budget {budget} cannot give every one of {horizon} timesteps a sample")]
    InfeasibleBudget { budget: u64, horizon: usize },

    #[error("continuous allocation sums to {sum}, expected budget {budget}")]
    BudgetMismatch { sum: f64, budget: u64 },

    #[error("instance with horizon {horizon} and budget {budget} exceeds the enumeration bound")]
    InstanceTooLarge { horizon: usize, budget: u64 },

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("invalid task: {0}")]
    InvalidTask(String),
}
