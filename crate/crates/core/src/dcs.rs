//! Data collection strategies.
//!
//! A schedule can be written two ways: as trajectory counts per length
//! ([`DcsCounts`], `m[h-1]` trajectories of length `h`) or as per-timestep
//! sample counts ([`DcsCumulative`], `n[t]` rewards observed at step `t`).
//! Everything downstream works in the cumulative form; counts are only needed
//! when trajectories are actually simulated.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of trajectories of each length: `m[h - 1]` trajectories of length `h`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DcsCounts(Vec<u64>);

/// Number of samples collected at each timestep `t = 0..T`.
///
/// Non-increasing by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DcsCumulative(Vec<u64>);

impl DcsCounts {
    pub fn new(counts: Vec<u64>) -> Self {
        DcsCounts(counts)
    }

    pub fn horizon(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    /// Trajectories of length `h` (1-based).
    pub fn trajectories_of_length(&self, h: usize) -> u64 {
        self.0[h - 1]
    }

    pub fn num_trajectories(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Total transitions, `sum_h m_h * h`.
    pub fn budget(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &m)| m * (i as u64 + 1))
            .sum()
    }

    pub fn to_cumulative(&self) -> DcsCumulative {
        cumulative_from_counts(self)
    }
}

impl DcsCumulative {
    /// Checks monotonicity and wraps the vector.
    pub fn new(n: Vec<u64>) -> Result<Self> {
        if let Some(index) = n.windows(2).position(|w| w[0] < w[1]) {
            return Err(Error::MonotonicityViolation { index });
        }
        Ok(DcsCumulative(n))
    }

    pub fn horizon(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u64> {
        self.0
    }

    pub fn get(&self, t: usize) -> u64 {
        self.0[t]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn last(&self) -> u64 {
        self.0.last().copied().unwrap_or(0)
    }

    pub fn to_counts(&self) -> DcsCounts {
        // Monotonicity is a type invariant, so the inverse map cannot fail.
        let t_len = self.0.len();
        let mut m = vec![0; t_len];
        for t in 0..t_len {
            let next = if t + 1 < t_len { self.0[t + 1] } else { 0 };
            m[t] = self.0[t] - next;
        }
        DcsCounts(m)
    }

    /// Element-wise sum of two schedules over the same horizon.
    pub fn add(&self, other: &DcsCumulative) -> DcsCumulative {
        assert_eq!(self.horizon(), other.horizon(), "horizon mismatch");
        DcsCumulative(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All-zero schedule, the identity for [`DcsCumulative::add`].
    pub fn zeros(horizon: usize) -> DcsCumulative {
        DcsCumulative(vec![0; horizon])
    }
}

/// `n_{T-1} = m_T`, `n_t = n_{t+1} + m_{t+1}`.
pub fn cumulative_from_counts(m: &DcsCounts) -> DcsCumulative {
    let mut n = vec![0u64; m.horizon()];
    let mut acc = 0;
    for t in (0..m.horizon()).rev() {
        acc += m.0[t];
        n[t] = acc;
    }
    DcsCumulative(n)
}

/// Inverse of [`cumulative_from_counts`]; fails on a non-monotone vector.
pub fn counts_from_cumulative(n: &[u64]) -> Result<DcsCounts> {
    Ok(DcsCumulative::new(n.to_vec())?.to_counts())
}

/// True iff `n` sums to `budget`, is non-increasing and collects at least one
/// full-length trajectory.
pub fn validate_budget(n: &[u64], budget: u64) -> bool {
    !n.is_empty()
        && n.iter().sum::<u64>() == budget
        && n.windows(2).all(|w| w[0] >= w[1])
        && *n.last().unwrap() >= 1
}
