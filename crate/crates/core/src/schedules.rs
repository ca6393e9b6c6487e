//! Pre-determined baseline schedules.

use crate::allocator::{round_allocation, solve_grouped, ContinuousAllocation, Group, GroupedProblem};
use crate::dcs::DcsCumulative;
use crate::error::{Error, Result};

/// Discount-driven importance weights `d_t`; positive and decreasing in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustWeights(Vec<f64>);

impl RobustWeights {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Smallest budget for which the square-root allocation gives the last
    /// step at least one sample: `sum_t sqrt(d_t) / sqrt(d_{T-1})`.
    pub fn min_budget(&self) -> f64 {
        let total: f64 = self.0.iter().map(|d| d.sqrt()).sum();
        total / self.0.last().unwrap().sqrt()
    }
}

/// Outcome of [`robust_dcs`].
#[derive(Debug, Clone, PartialEq)]
pub struct RobustSchedule {
    pub dcs: DcsCumulative,
    /// The budget was below the closed-form threshold, so the floored
    /// allocation was used instead.
    pub below_threshold: bool,
}

/// `Λ / T` full-length trajectories.
pub fn uniform_dcs(budget: u64, horizon: usize) -> Result<DcsCumulative> {
    if horizon == 0 || budget % horizon as u64 != 0 {
        return Err(Error::IndivisibleBudget { budget, horizon });
    }
    DcsCumulative::new(vec![budget / horizon as u64; horizon])
}

/// `d_t = g^t (g^t + g^{t+1} - 2 g^T) / (1 - g)`.
pub fn robust_weights(gamma: f64, horizon: usize) -> Result<RobustWeights> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::UnsupportedDiscount(gamma));
    }
    if horizon == 0 {
        return Err(Error::InvalidTask("horizon must be positive".into()));
    }
    let g_t_max = gamma.powi(horizon as i32);
    let d = (0..horizon)
        .map(|t| {
            let gt = gamma.powi(t as i32);
            gt * (gt + gt * gamma - 2.0 * g_t_max) / (1.0 - gamma)
        })
        .collect();
    Ok(RobustWeights(d))
}

/// Continuous allocation `n_t = Λ sqrt(d_t) / sum sqrt(d)`, before rounding.
pub fn robust_continuous(budget: u64, horizon: usize, gamma: f64) -> Result<Vec<f64>> {
    let d = robust_weights(gamma, horizon)?;
    let roots: Vec<f64> = d.as_slice().iter().map(|d| d.sqrt()).collect();
    let total: f64 = roots.iter().sum();
    Ok(roots.iter().map(|r| budget as f64 * r / total).collect())
}

/// Robust baseline schedule: square-root-of-`d_t` proportions, rounded.
///
/// Below the threshold budget the proportional form would starve the tail.
/// There each step is floored at one sample and the remainder is spread in
/// proportion to `sqrt(d_t)`, which minimizes `sum_t d_t / n_t` under
/// `n_t >= 1`; the result is flagged.
pub fn robust_dcs(budget: u64, horizon: usize, gamma: f64) -> Result<RobustSchedule> {
    let d = robust_weights(gamma, horizon)?;
    if (budget as f64) < d.min_budget() {
        if budget < horizon as u64 {
            return Err(Error::InfeasibleBudget { budget, horizon });
        }
        let groups = d
            .as_slice()
            .iter()
            .enumerate()
            .map(|(start, &numerator)| Group {
                start,
                len: 1,
                numerator,
            })
            .collect();
        let cont = solve_grouped(&GroupedProblem { groups, budget })?;
        return Ok(RobustSchedule {
            dcs: round_allocation(&cont, budget)?,
            below_threshold: true,
        });
    }
    let cont = robust_continuous(budget, horizon, gamma)?;
    let dcs = round_allocation(&ContinuousAllocation::new(cont), budget)?;
    Ok(RobustSchedule {
        dcs,
        below_threshold: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcs::validate_budget;
    use proptest::prelude::*;

    #[test]
    fn uniform_examples() {
        assert_eq!(uniform_dcs(10, 5).unwrap().as_slice(), &[2, 2, 2, 2, 2]);
        assert_eq!(uniform_dcs(4, 2).unwrap().as_slice(), &[2, 2]);
        assert_eq!(
            uniform_dcs(7, 2),
            Err(Error::IndivisibleBudget {
                budget: 7,
                horizon: 2
            })
        );
    }

    #[test]
    fn weights_examples() {
        let d = robust_weights(0.5, 2).unwrap();
        assert!((d.as_slice()[0] - 2.0).abs() < 1e-15);
        assert!((d.as_slice()[1] - 0.25).abs() < 1e-15);
        let d = robust_weights(0.5, 1).unwrap();
        assert!((d.as_slice()[0] - 1.0).abs() < 1e-15);
        assert_eq!(robust_weights(1.0, 3), Err(Error::UnsupportedDiscount(1.0)));
    }

    #[test]
    fn last_weight_simplifies() {
        for &g in &[0.1, 0.5, 0.9, 0.99] {
            for t_len in [1usize, 2, 7, 40] {
                let d = robust_weights(g, t_len).unwrap();
                let expect = g.powi(2 * (t_len as i32 - 1));
                let got = *d.as_slice().last().unwrap();
                assert!((got - expect).abs() <= 1e-12 * expect.max(1e-300), "{g} {t_len}");
            }
        }
    }

    #[test]
    fn weights_decrease_for_all_discounts() {
        for i in 1..100 {
            let g = i as f64 / 100.0;
            // Beyond this the last weight g^(2(T-1)) is not representable.
            let max_len = (1.0 + f64::MIN_POSITIVE.ln() / (2.0 * g.ln())) as usize;
            for t_len in 1..=100.min(max_len) {
                let d = robust_weights(g, t_len).unwrap();
                assert!(d.as_slice().iter().all(|&x| x > 0.0), "{g} {t_len}");
                assert!(d.as_slice().windows(2).all(|w| w[0] > w[1]), "{g} {t_len}");
            }
        }
    }

    #[test]
    fn robust_examples() {
        let r = robust_dcs(10, 2, 0.5).unwrap();
        assert_eq!(r.dcs.as_slice(), &[8, 2]);
        assert!(!r.below_threshold);

        assert_eq!(robust_dcs(37, 1, 0.8).unwrap().dcs.as_slice(), &[37]);

        let r = robust_dcs(10_000, 10, 0.01).unwrap();
        let n = r.dcs.as_slice();
        assert!(n[0] as f64 / n[9] as f64 > 100.0);
        assert!(validate_budget(n, 10_000));
    }

    #[test]
    fn robust_falls_back_below_threshold() {
        let d = robust_weights(0.5, 6).unwrap();
        let budget = d.min_budget().floor() as u64 - 1;
        let r = robust_dcs(budget, 6, 0.5).unwrap();
        assert!(r.below_threshold);
        assert!(validate_budget(r.dcs.as_slice(), budget));
        assert_eq!(r.dcs.last(), 1);
    }

    #[test]
    fn continuous_proportionality() {
        for &g in &[0.3, 0.9, 0.999] {
            for t_len in [2usize, 10, 50] {
                let n = robust_continuous(100_000, t_len, g).unwrap();
                let d = robust_weights(g, t_len).unwrap();
                for t in 1..t_len {
                    let lhs = n[0] / n[t];
                    let rhs = (d.as_slice()[0] / d.as_slice()[t]).sqrt();
                    assert!((lhs / rhs - 1.0).abs() < 1e-9);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn robust_is_budget_exact(g in 0.05f64..0.995, t_len in 1usize..30, extra in 0u64..5000) {
            let budget = t_len as u64 + extra;
            let r = robust_dcs(budget, t_len, g).unwrap();
            prop_assert!(validate_budget(r.dcs.as_slice(), budget));
        }
    }
}
