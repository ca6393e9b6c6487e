//! Per-phase budget allocation.
//!
//! The allocation problem is
//!
//! ```text
//! minimize   sum_t f_t / n_t
//! subject to sum_t n_t = budget,  n_0 >= n_1 >= ... >= n_{T-1} >= 1
//! ```
//!
//! With some `f_t < 0` it is not convex. [`group_partition`] pools each
//! negative coefficient with the following ones until the running sum turns
//! non-negative; the optimum is constant over such a span, so every pooled
//! span becomes a single variable. The resulting [`GroupedProblem`] has only
//! non-negative numerators and is solved exactly by [`solve_grouped`].

use crate::dcs::DcsCumulative;
use crate::error::{Error, Result};
use crate::estimator::{discount_powers, SurrogateCoefficients, UpperTriangular};

/// Optimistic inflation of the empirical moments.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplorationBonuses {
    pub std_bonus: Vec<f64>,
    /// Entry `(t, u)` depends only on the sample count at `u`.
    pub cov_bonus: UpperTriangular,
    pub beta: f64,
}

/// Contiguous span of timesteps sharing one allocation variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub start: usize,
    pub len: usize,
    pub numerator: f64,
}

impl Group {
    pub fn end(&self) -> usize {
        self.start + self.len
    }
}

/// Convexified allocation problem: minimize `sum_g F_g / y_g` subject to
/// `sum_g l_g y_g = budget`, `y_g >= y_{g+1}`, `y_g >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedProblem {
    pub groups: Vec<Group>,
    pub budget: u64,
}

impl GroupedProblem {
    pub fn horizon(&self) -> usize {
        self.groups.iter().map(|g| g.len).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Partition {
    Grouped(GroupedProblem),
    /// A negative running sum reaches the end of the horizon starting from
    /// step 0; the caller should spend the batch uniformly.
    UniformFallback,
}

/// Relaxed (real-valued) allocation over `T` timesteps.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousAllocation(Vec<f64>);

impl ContinuousAllocation {
    pub fn new(n: Vec<f64>) -> Self {
        ContinuousAllocation(n)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// `C^s_t = sqrt(2 ln(beta) / N_t)`, `C^c_{t,u} = 3 sqrt(2 ln(beta) / N_u)`.
pub fn compute_bonuses(prior_counts: &[u64], beta: f64) -> Result<ExplorationBonuses> {
    if !(beta >= 1.0) {
        return Err(Error::InvalidBeta(beta));
    }
    if let Some(t) = prior_counts.iter().position(|&c| c == 0) {
        return Err(Error::InsufficientSamples {
            needed: 1,
            got: prior_counts[t] as usize,
        });
    }
    let log_beta = beta.ln();
    let base: Vec<f64> = prior_counts
        .iter()
        .map(|&c| (2.0 * log_beta / c as f64).sqrt())
        .collect();
    let cov_bonus = UpperTriangular::from_fn(prior_counts.len(), |_, u| 3.0 * base[u]);
    Ok(ExplorationBonuses {
        std_bonus: base,
        cov_bonus,
        beta,
    })
}

/// `f_t = g^{2t} (s_t + C^s_t)^2 + 2 sum_{u>t} g^{t+u} (Cov_{t,u} + C^c_{t,u})`.
pub fn empirical_surrogate(
    stds: &[f64],
    covs: &UpperTriangular,
    bonuses: &ExplorationBonuses,
    gamma: f64,
) -> SurrogateCoefficients {
    let horizon = stds.len();
    assert_eq!(covs.dim(), horizon);
    assert_eq!(bonuses.std_bonus.len(), horizon);
    let pow = discount_powers(gamma, 2 * horizon);
    let f = (0..horizon)
        .map(|t| {
            let s = stds[t] + bonuses.std_bonus[t];
            pow[2 * t] * s * s
                + 2.0
                    * (t + 1..horizon)
                        .map(|u| pow[t + u] * (covs.get(t, u) + bonuses.cov_bonus.get(t, u)))
                        .sum::<f64>()
        })
        .collect();
    SurrogateCoefficients::new(f)
}

/// Pools negative coefficients with their successors.
///
/// Scanning left to right, a negative `f_y` opens a group that extends to the
/// first `q` with `f_y + ... + f_q >= 0`; other indices are singletons. If
/// no such `q` exists for some `y`, the tail `y..T` is merged into the group
/// holding `y - 1`, which keeps its own numerator, or the whole problem falls
/// back to uniform when `y = 0`.
pub fn group_partition(f: &SurrogateCoefficients, budget: u64) -> Partition {
    let f = f.as_slice();
    let horizon = f.len();
    let mut groups: Vec<Group> = Vec::new();
    let mut t = 0;
    while t < horizon {
        if f[t] >= 0.0 {
            groups.push(Group {
                start: t,
                len: 1,
                numerator: f[t],
            });
            t += 1;
            continue;
        }
        let mut acc = f[t];
        let mut q = t;
        while acc < 0.0 && q + 1 < horizon {
            q += 1;
            acc += f[q];
        }
        if acc >= 0.0 {
            groups.push(Group {
                start: t,
                len: q - t + 1,
                numerator: acc,
            });
            t = q + 1;
            continue;
        }
        // Ill-conditioned tail: no prefix from t ever turns non-negative.
        match groups.last_mut() {
            None => return Partition::UniformFallback,
            Some(prev) => {
                prev.len = horizon - prev.start;
            }
        }
        break;
    }
    Partition::Grouped(GroupedProblem { groups, budget })
}

/// Exact minimizer of the grouped problem.
///
/// Each group's unconstrained optimum is proportional to `sqrt(F_g / l_g)`.
/// Adjacent groups violating the ordering are pooled (pool-adjacent-violators),
/// after which the optimum is `y_g = max(1, s * v_g)` with the scale `s` fixed
/// by the budget equality. Groups with a zero numerator sit at 1; if every
/// numerator is zero the budget is spread uniformly.
pub fn solve_grouped(p: &GroupedProblem) -> Result<ContinuousAllocation> {
    let horizon = p.horizon();
    if p.budget < horizon as u64 {
        return Err(Error::InfeasibleBudget {
            budget: p.budget,
            horizon,
        });
    }
    if let Some(g) = p.groups.iter().find(|g| !(g.numerator >= 0.0)) {
        return Err(Error::InvalidMoments(format!(
            "group starting at {} has numerator {}",
            g.start, g.numerator
        )));
    }

    struct Block {
        numerator: f64,
        len: usize,
        groups: usize,
    }
    impl Block {
        fn level(&self) -> f64 {
            (self.numerator / self.len as f64).sqrt()
        }
    }

    let mut blocks: Vec<Block> = Vec::with_capacity(p.groups.len());
    for g in &p.groups {
        let mut b = Block {
            numerator: g.numerator,
            len: g.len,
            groups: 1,
        };
        while let Some(prev) = blocks.last() {
            if prev.level() >= b.level() {
                break;
            }
            let prev = blocks.pop().unwrap();
            b = Block {
                numerator: prev.numerator + b.numerator,
                len: prev.len + b.len,
                groups: prev.groups + b.groups,
            };
        }
        blocks.push(b);
    }

    let budget = p.budget as f64;
    let levels: Vec<f64> = blocks.iter().map(Block::level).collect();
    let positive = levels.iter().take_while(|&&v| v > 0.0).count();

    let block_values: Vec<f64> = if positive == 0 {
        vec![budget / horizon as f64; blocks.len()]
    } else {
        // Activate blocks in order of decreasing level until the next one
        // would stay at the lower bound.
        let mut tail_len: usize = blocks.iter().map(|b| b.len).sum();
        let mut weighted = 0.0;
        let mut scale = 0.0;
        for k in 0..positive {
            tail_len -= blocks[k].len;
            weighted += blocks[k].len as f64 * levels[k];
            scale = (budget - tail_len as f64) / weighted;
            if k + 1 == positive || scale * levels[k + 1] <= 1.0 {
                break;
            }
        }
        levels.iter().map(|v| (scale * v).max(1.0)).collect()
    };

    let mut n = Vec::with_capacity(horizon);
    let mut groups = p.groups.iter();
    for (b, &value) in blocks.iter().zip(&block_values) {
        for g in groups.by_ref().take(b.groups) {
            n.extend(std::iter::repeat(value).take(g.len));
        }
    }
    Ok(ContinuousAllocation(n))
}

/// Continuous optimum of `sum f_t / n_t` under the budget, via grouping.
///
/// Returns the uniform allocation when the coefficients are ill-conditioned
/// from the first step.
pub fn solve_relaxed(f: &SurrogateCoefficients, budget: u64) -> Result<ContinuousAllocation> {
    match group_partition(f, budget) {
        Partition::Grouped(p) => solve_grouped(&p),
        Partition::UniformFallback => {
            let horizon = f.horizon();
            if budget < horizon as u64 {
                return Err(Error::InfeasibleBudget { budget, horizon });
            }
            Ok(ContinuousAllocation(vec![
                budget as f64 / horizon as f64;
                horizon
            ]))
        }
    }
}

/// Floors every entry and hands the leftover `k` units to the first `k` steps.
pub fn round_allocation(n: &ContinuousAllocation, budget: u64) -> Result<DcsCumulative> {
    let sum = n.total();
    if !((sum - budget as f64).abs() <= 0.5) {
        return Err(Error::BudgetMismatch { sum, budget });
    }
    let floors: Vec<u64> = n
        .0
        .iter()
        .map(|&x| {
            // Values a hair below an integer are solver noise, not a deficit.
            let r = x.round();
            let x = if (x - r).abs() < 1e-9 { r } else { x };
            x.floor().max(1.0) as u64
        })
        .collect();
    let floor_sum: u64 = floors.iter().sum();
    let k = budget.saturating_sub(floor_sum) as usize;
    if k > floors.len() || floor_sum > budget {
        return Err(Error::BudgetMismatch { sum, budget });
    }
    let rounded = floors
        .into_iter()
        .enumerate()
        .map(|(t, x)| x + u64::from(t < k))
        .collect();
    DcsCumulative::new(rounded)
}

/// Largest horizon accepted by [`brute_force_oracle`].
pub const ORACLE_MAX_HORIZON: usize = 8;
/// Largest budget accepted by [`brute_force_oracle`].
pub const ORACLE_MAX_BUDGET: u64 = 40;

/// Exhaustive integer minimizer of `sum f_t / n_t` over non-increasing
/// schedules with `n_t >= 1` and `sum n_t <= budget`.
///
/// Ties go to the lexicographically largest schedule.
pub fn brute_force_oracle(f: &SurrogateCoefficients, budget: u64) -> Result<(DcsCumulative, f64)> {
    let horizon = f.horizon();
    if horizon == 0 || horizon > ORACLE_MAX_HORIZON || budget > ORACLE_MAX_BUDGET {
        return Err(Error::InstanceTooLarge { horizon, budget });
    }
    if budget < horizon as u64 {
        return Err(Error::InfeasibleBudget { budget, horizon });
    }

    struct Search<'a> {
        f: &'a [f64],
        current: Vec<u64>,
        best: Option<(Vec<u64>, f64)>,
    }
    impl Search<'_> {
        // Candidates are visited in lexicographically decreasing order, so
        // only a strict improvement replaces the incumbent.
        fn visit(&mut self, t: usize, cap: u64, remaining: u64, partial: f64) {
            let horizon = self.f.len();
            if t == horizon {
                let better = match &self.best {
                    None => true,
                    Some((_, v)) => partial < v - 1e-12 * v.abs().max(1.0),
                };
                if better {
                    self.best = Some((self.current.clone(), partial));
                }
                return;
            }
            let reserve = (horizon - t - 1) as u64;
            let hi = cap.min(remaining - reserve);
            for v in (1..=hi).rev() {
                self.current[t] = v;
                self.visit(t + 1, v, remaining - v, partial + self.f[t] / v as f64);
            }
        }
    }

    let mut search = Search {
        f: f.as_slice(),
        current: vec![0; horizon],
        best: None,
    };
    search.visit(0, budget, budget, 0.0);
    let (n, value) = search.best.expect("budget >= horizon admits a schedule");
    Ok((DcsCumulative::new(n)?, value))
}
