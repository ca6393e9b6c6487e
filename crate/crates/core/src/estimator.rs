//! Truncated-trajectory return estimator and reward moment estimators.

use crate::dcs::DcsCumulative;
use crate::error::{Error, Result};
use crate::schedules::robust_weights;

/// Strictly upper-triangular `T x T` matrix, indexed `(t, t')` with `t < t'`.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperTriangular {
    dim: usize,
    data: Vec<f64>,
}

impl UpperTriangular {
    pub fn zeros(dim: usize) -> Self {
        UpperTriangular {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for t in 0..dim {
            for u in t + 1..dim {
                m.set(t, u, f(t, u));
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, t: usize, u: usize) -> f64 {
        debug_assert!(t < u && u < self.dim);
        self.data[t * self.dim + u]
    }

    pub fn set(&mut self, t: usize, u: usize, value: f64) {
        debug_assert!(t < u && u < self.dim);
        self.data[t * self.dim + u] = value;
    }
}

/// Coefficients `f_t` weighting `1 / n_t` in the variance surrogate.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateCoefficients(Vec<f64>);

impl SurrogateCoefficients {
    pub fn new(f: Vec<f64>) -> Self {
        SurrogateCoefficients(f)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn horizon(&self) -> usize {
        self.0.len()
    }

    /// `sum_t f_t / n_t` for a (possibly fractional) allocation.
    pub fn objective(&self, n: &[f64]) -> f64 {
        assert_eq!(n.len(), self.0.len(), "horizon mismatch");
        self.0.iter().zip(n).map(|(f, n)| f / n).sum()
    }

    /// `s[t] = sum_{u >= t} f_u`.
    pub fn suffix_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.0.len()];
        let mut acc = 0.0;
        for t in (0..self.0.len()).rev() {
            acc += self.0[t];
            s[t] = acc;
        }
        s
    }
}

/// Rewards of every collected trajectory, in collection order.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardDataset {
    horizon: usize,
    trajectories: Vec<Vec<f64>>,
}

/// Per-timestep moment estimates computed from a [`RewardDataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMoments {
    pub counts: Vec<u64>,
    pub means: Vec<f64>,
    /// Square root of the unbiased variance; 0 where fewer than two samples exist.
    pub stds: Vec<f64>,
    /// Asymmetric plug-in covariance; 0 where no pair exists.
    pub covariances: UpperTriangular,
}

impl RewardDataset {
    pub fn new(horizon: usize) -> Self {
        RewardDataset {
            horizon,
            trajectories: Vec::new(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn trajectories(&self) -> &[Vec<f64>] {
        &self.trajectories
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn push(&mut self, rewards: Vec<f64>) {
        assert!(
            !rewards.is_empty() && rewards.len() <= self.horizon,
            "trajectory length {} outside 1..={}",
            rewards.len(),
            self.horizon
        );
        self.trajectories.push(rewards);
    }

    pub fn extend(&mut self, other: RewardDataset) {
        assert_eq!(self.horizon, other.horizon, "horizon mismatch");
        self.trajectories.extend(other.trajectories);
    }

    /// Number of samples observed at each timestep.
    pub fn counts(&self) -> Vec<u64> {
        let mut n = vec![0u64; self.horizon];
        for tr in &self.trajectories {
            for c in &mut n[..tr.len()] {
                *c += 1;
            }
        }
        n
    }

    /// All rewards observed at timestep `t`.
    pub fn samples_at(&self, t: usize) -> Vec<f64> {
        self.trajectories
            .iter()
            .filter_map(|tr| tr.get(t).copied())
            .collect()
    }

    /// `(R_t, R_u)` pairs from trajectories long enough to reach `u > t`.
    pub fn paired(&self, t: usize, u: usize) -> Vec<(f64, f64)> {
        assert!(t < u);
        self.trajectories
            .iter()
            .filter(|tr| tr.len() > u)
            .map(|tr| (tr[t], tr[u]))
            .collect()
    }

    /// Moment estimates for every timestep and pair of timesteps.
    ///
    /// Recomputed from the stored trajectories in two centered passes.
    pub fn moments(&self) -> EmpiricalMoments {
        let horizon = self.horizon;
        let counts = self.counts();
        let mut sums = vec![0.0; horizon];
        for tr in &self.trajectories {
            for (s, r) in sums.iter_mut().zip(tr) {
                *s += r;
            }
        }
        let means: Vec<f64> = sums
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
            .collect();

        let mut sq = vec![0.0; horizon];
        // paired_sum[t][u]: sum of R_t over trajectories reaching u.
        let mut cross = UpperTriangular::zeros(horizon);
        let mut paired_sum = UpperTriangular::zeros(horizon);
        for tr in &self.trajectories {
            for (t, r) in tr.iter().enumerate() {
                let dt = r - means[t];
                sq[t] += dt * dt;
                for (u, ru) in tr.iter().enumerate().skip(t + 1) {
                    let i = t * horizon + u;
                    cross.data[i] += dt * (ru - means[u]);
                    paired_sum.data[i] += r;
                }
            }
        }

        let stds = sq
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| {
                if c >= 2 {
                    (s / (c - 1) as f64).sqrt()
                } else {
                    0.0
                }
            })
            .collect();

        let covariances = UpperTriangular::from_fn(horizon, |t, u| {
            let n_u = counts[u];
            if n_u == 0 {
                return 0.0;
            }
            let n_u = n_u as f64;
            // (1/n_u) sum (R_t - m_t)(R_u - m_u) differs from the plug-in form
            // by m_u * (paired mean of R_t - m_t).
            let paired_mean_t = paired_sum.get(t, u) / n_u;
            cross.get(t, u) / n_u + means[u] * (paired_mean_t - means[t])
        });

        EmpiricalMoments {
            counts,
            means,
            stds,
            covariances,
        }
    }
}

/// Square root of the unbiased sample variance.
pub fn empirical_std(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let n = samples.len() as f64;
    // Shifting by the first sample keeps constant inputs exactly at zero.
    let shift = samples[0];
    let mean = samples.iter().map(|x| x - shift).sum::<f64>() / n;
    let ss: f64 = samples.iter().map(|x| (x - shift - mean).powi(2)).sum();
    Ok((ss / (n - 1.0)).sqrt())
}

/// Plug-in covariance between steps `t < u`.
///
/// The product term and the mean at `u` use only the `paired` samples; the
/// mean at `t` uses every sample in `samples_t`.
pub fn empirical_cov(samples_t: &[f64], paired: &[(f64, f64)]) -> Result<f64> {
    if paired.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    if samples_t.len() < paired.len() {
        return Err(Error::InsufficientSamples {
            needed: paired.len(),
            got: samples_t.len(),
        });
    }
    let n_u = paired.len() as f64;
    let mean_t = samples_t.iter().sum::<f64>() / samples_t.len() as f64;
    let mean_u = paired.iter().map(|p| p.1).sum::<f64>() / n_u;
    let prod = paired.iter().map(|p| p.0 * p.1).sum::<f64>() / n_u;
    Ok(prod - mean_t * mean_u)
}

/// `f_t = g^{2t} Var(R_t) + 2 sum_{u > t} g^{t+u} Cov(R_t, R_u)`.
pub fn exact_surrogate(
    variances: &[f64],
    covariances: &UpperTriangular,
    gamma: f64,
) -> Result<SurrogateCoefficients> {
    let horizon = variances.len();
    if covariances.dim() != horizon {
        return Err(Error::InvalidMoments(format!(
            "covariance matrix has dimension {}, expected {horizon}",
            covariances.dim()
        )));
    }
    if let Some(t) = variances.iter().position(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidMoments(format!(
            "variance at timestep {t} is {}",
            variances[t]
        )));
    }
    for t in 0..horizon {
        for u in t + 1..horizon {
            let bound = (variances[t] * variances[u]).sqrt();
            let c = covariances.get(t, u);
            if c.abs() > bound * (1.0 + 1e-9) + 1e-12 {
                return Err(Error::InvalidMoments(format!(
                    "|Cov({t}, {u})| = {} exceeds {bound}",
                    c.abs()
                )));
            }
        }
    }
    let pow = discount_powers(gamma, 2 * horizon);
    let f = (0..horizon)
        .map(|t| {
            pow[2 * t] * variances[t]
                + 2.0
                    * (t + 1..horizon)
                        .map(|u| pow[t + u] * covariances.get(t, u))
                        .sum::<f64>()
        })
        .collect();
    Ok(SurrogateCoefficients(f))
}

/// Exact variance `sum_t f_t / n_t` of the estimator under a fixed schedule.
pub fn deterministic_variance(f: &SurrogateCoefficients, n: &DcsCumulative) -> Result<f64> {
    assert_eq!(f.horizon(), n.horizon(), "horizon mismatch");
    if let Some(index) = n.as_slice().iter().position(|&c| c == 0) {
        return Err(Error::ZeroAllocation { index });
    }
    Ok(f
        .as_slice()
        .iter()
        .zip(n.as_slice())
        .map(|(f, &c)| f / c as f64)
        .sum())
}

/// Half-width of the `1 - delta` Hoeffding-style interval for rewards in `[0, 1]`.
pub fn hoeffding_width(n: &DcsCumulative, gamma: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::ConfigInvalid(format!("delta must be in (0, 1), got {delta}")));
    }
    let d = robust_weights(gamma, n.horizon())?;
    if let Some(index) = n.as_slice().iter().position(|&c| c == 0) {
        return Err(Error::ZeroAllocation { index });
    }
    let s: f64 = d
        .as_slice()
        .iter()
        .zip(n.as_slice())
        .map(|(d, &c)| d / c as f64)
        .sum();
    Ok((0.5 * (2.0 / delta).ln() * s).sqrt())
}

/// Estimate of the expected discounted return from a dataset collected under `n`.
///
/// Each reward at step `t` is weighted by `gamma^t / n_t`.
pub fn estimate_return(data: &RewardDataset, n: &DcsCumulative, gamma: f64) -> Result<f64> {
    let counts = data.counts();
    if counts.len() != n.horizon() {
        return Err(Error::InvalidTask(format!(
            "dataset horizon {} differs from schedule horizon {}",
            counts.len(),
            n.horizon()
        )));
    }
    for (t, (&found, &expected)) in counts.iter().zip(n.as_slice()).enumerate() {
        if found != expected {
            return Err(Error::InconsistentDataset {
                timestep: t,
                expected,
                found,
            });
        }
    }
    if n.last() == 0 {
        return Err(Error::ZeroAllocation {
            index: n.horizon() - 1,
        });
    }
    let pow = discount_powers(gamma, n.horizon());
    // Accumulate per-timestep sums first so the result does not depend on the
    // interleaving of trajectories of different lengths.
    let mut sums = vec![0.0; n.horizon()];
    for tr in data.trajectories() {
        for (s, r) in sums.iter_mut().zip(tr) {
            *s += r;
        }
    }
    Ok(sums
        .iter()
        .zip(n.as_slice())
        .enumerate()
        .filter(|(_, (_, &c))| c > 0)
        .map(|(t, (s, &c))| pow[t] * s / c as f64)
        .sum())
}

/// `[1, g, g^2, ..., g^{len-1}]`.
pub(crate) fn discount_powers(gamma: f64, len: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(len);
    let mut acc = 1.0;
    for _ in 0..len {
        p.push(acc);
        acc *= gamma;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcs::DcsCounts;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Pairwise U-statistic, kept independent of `empirical_std`.
    fn u_stat_std(x: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mut s = 0.0;
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                s += (x[i] - x[j]).powi(2);
            }
        }
        (s / (n * (n - 1.0))).sqrt()
    }

    #[test]
    fn std_examples() {
        assert!(close(empirical_std(&[0.0, 1.0]).unwrap(), 0.5f64.sqrt(), 1e-12));
        assert_eq!(empirical_std(&[3.3, 3.3, 3.3]).unwrap(), 0.0);
        assert!(close(
            empirical_std(&[0.0, 0.0, 1.0, 1.0]).unwrap(),
            (1.0f64 / 3.0).sqrt(),
            1e-12
        ));
        assert_eq!(
            empirical_std(&[1.0]),
            Err(Error::InsufficientSamples { needed: 2, got: 1 })
        );
    }

    #[test]
    fn std_matches_pairwise_form() {
        let x = [0.3, -1.2, 4.0, 2.2, 2.2, 9.1, -0.4];
        assert!(close(empirical_std(&x).unwrap(), u_stat_std(&x), 1e-12));
    }

    #[test]
    fn cov_examples() {
        let c = empirical_cov(&[0.0, 1.0], &[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert!(close(c, 0.25, 1e-15));
        let c = empirical_cov(&[0.0, 1.0, 1.0], &[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert!(close(c, 1.0 / 6.0, 1e-15));
        let c = empirical_cov(&[0.2, 1.7, -3.0], &[(0.2, 4.0), (1.7, 4.0), (-3.0, 4.0)])
            .unwrap();
        assert!(close(c, 0.0, 1e-12));
        assert!(empirical_cov(&[1.0], &[]).is_err());
    }

    #[test]
    fn dataset_moments_match_standalone_estimators() {
        let mut d = RewardDataset::new(3);
        d.push(vec![1.0, 2.0, 0.5]);
        d.push(vec![0.0]);
        d.push(vec![3.0, -1.0]);
        d.push(vec![2.0, 2.5, 1.5]);
        d.push(vec![-1.0, 0.0, 4.0]);
        let m = d.moments();
        assert_eq!(m.counts, vec![5, 4, 3]);
        for t in 0..3 {
            let s = empirical_std(&d.samples_at(t)).unwrap();
            assert!(close(m.stds[t], s, 1e-12));
            for u in t + 1..3 {
                let c = empirical_cov(&d.samples_at(t), &d.paired(t, u)).unwrap();
                assert!(close(m.covariances.get(t, u), c, 1e-12), "{t} {u}");
            }
        }
    }

    #[test]
    fn estimator_examples() {
        let mut d = RewardDataset::new(2);
        d.push(vec![1.0, 2.0]);
        d.push(vec![0.5, 4.0]);
        let n = DcsCumulative::new(vec![2, 2]).unwrap();
        let g = 0.7;
        let expect = ((1.0 + g * 2.0) + (0.5 + g * 4.0)) / 2.0;
        assert!(close(estimate_return(&d, &n, g).unwrap(), expect, 1e-12));

        let mut d = RewardDataset::new(2);
        d.push(vec![1.0]);
        d.push(vec![0.0, 1.0]);
        let n = DcsCounts::new(vec![1, 1]).to_cumulative();
        assert!(close(estimate_return(&d, &n, 0.5).unwrap(), 1.0, 1e-15));

        let mut d = RewardDataset::new(3);
        d.push(vec![0.0, 0.0, 0.0]);
        d.push(vec![0.0]);
        let n = DcsCumulative::new(vec![2, 1, 1]).unwrap();
        assert_eq!(estimate_return(&d, &n, 0.9).unwrap(), 0.0);
    }

    #[test]
    fn estimator_rejects_mismatched_schedule() {
        let mut d = RewardDataset::new(2);
        d.push(vec![1.0, 2.0]);
        let n = DcsCumulative::new(vec![2, 1]).unwrap();
        assert_eq!(
            estimate_return(&d, &n, 1.0),
            Err(Error::InconsistentDataset {
                timestep: 0,
                expected: 2,
                found: 1
            })
        );
    }

    #[test]
    fn surrogate_examples() {
        let f = exact_surrogate(&[1.0, 1.0], &UpperTriangular::zeros(2), 1.0).unwrap();
        assert_eq!(f.as_slice(), &[1.0, 1.0]);
        let f = exact_surrogate(&[1.0, 1.0], &UpperTriangular::from_fn(2, |_, _| -0.5), 1.0)
            .unwrap();
        assert_eq!(f.as_slice(), &[0.0, 1.0]);
        let f = exact_surrogate(&[0.0; 4], &UpperTriangular::zeros(4), 0.9).unwrap();
        assert_eq!(f.as_slice(), &[0.0; 4]);
        assert!(matches!(
            exact_surrogate(&[1.0, -1.0], &UpperTriangular::zeros(2), 1.0),
            Err(Error::InvalidMoments(_))
        ));
    }

    #[test]
    fn variance_examples() {
        let f = SurrogateCoefficients::new(vec![1.0, 1.0]);
        let n = DcsCumulative::new(vec![2, 1]).unwrap();
        assert!(close(deterministic_variance(&f, &n).unwrap(), 1.5, 1e-15));

        let (lambda, t_len) = (100u64, 5usize);
        let mut fv = vec![0.0; t_len];
        fv[0] = 3.0;
        let mut nv = vec![1u64; t_len];
        nv[0] = lambda - (t_len as u64 - 1);
        let v = deterministic_variance(
            &SurrogateCoefficients::new(fv),
            &DcsCumulative::new(nv).unwrap(),
        )
        .unwrap();
        assert!(close(v, 3.0 / 96.0, 1e-15));

        let n0 = DcsCumulative::new(vec![2, 0]).unwrap();
        assert_eq!(
            deterministic_variance(&f, &n0),
            Err(Error::ZeroAllocation { index: 1 })
        );
    }

    #[test]
    fn variance_is_homogeneous() {
        let f = SurrogateCoefficients::new(vec![2.0, -0.5, 1.0]);
        let n = [4.0, 3.0, 1.5];
        let scaled: Vec<f64> = n.iter().map(|x| x * 2.5).collect();
        assert!(close(f.objective(&scaled), f.objective(&n) / 2.5, 1e-12));
    }

    #[test]
    fn hoeffding_examples() {
        let delta = 0.05;
        let n = DcsCumulative::new(vec![7]).unwrap();
        let w = hoeffding_width(&n, 0.3, delta).unwrap();
        assert!(close(w, ((2.0f64 / delta).ln() / 14.0).sqrt(), 1e-12));

        let n = DcsCumulative::new(vec![5, 3]).unwrap();
        let n2 = DcsCumulative::new(vec![10, 6]).unwrap();
        let w1 = hoeffding_width(&n, 0.5, delta).unwrap();
        let w2 = hoeffding_width(&n2, 0.5, delta).unwrap();
        assert!(close(w1 / w2, 2f64.sqrt(), 1e-12));
        assert_eq!(
            hoeffding_width(&n, 1.0, delta),
            Err(Error::UnsupportedDiscount(1.0))
        );
    }
}
