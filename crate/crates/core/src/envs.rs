//! Simulated environments and the policies evaluated on them.
//!
//! Normal distributions are parameterized by `(mean, variance)` throughout.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::estimator::{exact_surrogate, SurrogateCoefficients, UpperTriangular};
use crate::rng::TrajRng;

pub trait Environment: Send + Sync {
    type State: Clone;
    type Action;

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::State;

    /// One transition. The horizon is imposed by the caller.
    fn step<R: Rng + ?Sized>(
        &self,
        state: &Self::State,
        action: &Self::Action,
        rng: &mut R,
    ) -> (Self::State, f64);
}

/// Markov policy: the action depends only on the current state.
pub trait Policy<S>: Send + Sync {
    type Action;

    fn act<R: Rng + ?Sized>(&self, state: &S, rng: &mut R) -> Self::Action;
}

/// Rewards `(R_0, ..., R_{h-1})` of one rollout of length `h`.
pub fn sample_trajectory<E, P, R>(env: &E, policy: &P, h: usize, rng: &mut R) -> Vec<f64>
where
    E: Environment,
    P: Policy<E::State, Action = E::Action>,
    R: Rng + ?Sized,
{
    assert!(h >= 1, "trajectory length must be positive");
    let mut rewards = Vec::with_capacity(h);
    let mut state = env.reset(rng);
    for _ in 0..h {
        let action = policy.act(&state, rng);
        let (next, reward) = env.step(&state, &action, rng);
        rewards.push(reward);
        state = next;
    }
    rewards
}

/// Closed-form per-timestep reward moments.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardMoments {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub covariances: UpperTriangular,
}

impl RewardMoments {
    pub fn surrogate(&self, gamma: f64) -> Result<SurrogateCoefficients> {
        exact_surrogate(&self.variances, &self.covariances, gamma)
    }
}

/// Object-safe view of an evaluation task: something that can produce reward
/// sequences of any length up to the horizon.
pub trait Rollout: Send + Sync {
    fn name(&self) -> &str;
    fn horizon(&self) -> usize;
    fn gamma(&self) -> f64;
    fn sample_rewards(&self, len: usize, rng: &mut TrajRng) -> Vec<f64>;

    /// `E[R_t]` when known in closed form.
    fn expected_rewards(&self) -> Option<&[f64]> {
        None
    }

    /// Full second-order moments when known in closed form.
    fn exact_moments(&self) -> Option<&RewardMoments> {
        None
    }

    /// `J = sum_t gamma^t E[R_t]` when the expected rewards are known.
    fn exact_return(&self) -> Option<f64> {
        let means = self.expected_rewards()?;
        let mut g = 1.0;
        let mut j = 0.0;
        for m in means {
            j += g * m;
            g *= self.gamma();
        }
        Some(j)
    }

    fn exact_surrogate(&self) -> Option<SurrogateCoefficients> {
        self.exact_moments()?.surrogate(self.gamma()).ok()
    }
}

/// Environment, policy, horizon and discount bundled together.
#[derive(Debug, Clone)]
pub struct EvalTask<E, P> {
    name: String,
    pub env: E,
    pub policy: P,
    horizon: usize,
    gamma: f64,
    means: Option<Vec<f64>>,
    moments: Option<RewardMoments>,
}

impl<E, P> EvalTask<E, P> {
    pub fn new(name: impl Into<String>, env: E, policy: P, horizon: usize, gamma: f64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidTask("horizon must be at least 1".into()));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidTask(format!("discount must be in (0, 1], got {gamma}")));
        }
        Ok(EvalTask {
            name: name.into(),
            env,
            policy,
            horizon,
            gamma,
            means: None,
            moments: None,
        })
    }

    pub fn with_expected_rewards(mut self, means: Vec<f64>) -> Self {
        assert_eq!(means.len(), self.horizon);
        self.means = Some(means);
        self
    }

    pub fn with_moments(mut self, moments: RewardMoments) -> Self {
        assert_eq!(moments.means.len(), self.horizon);
        self.means = Some(moments.means.clone());
        self.moments = Some(moments);
        self
    }
}

impl<E, P> Rollout for EvalTask<E, P>
where
    E: Environment,
    P: Policy<E::State, Action = E::Action>,
{
    fn name(&self) -> &str {
        &self.name
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn sample_rewards(&self, len: usize, rng: &mut TrajRng) -> Vec<f64> {
        sample_trajectory(&self.env, &self.policy, len, rng)
    }

    fn expected_rewards(&self) -> Option<&[f64]> {
        self.means.as_deref()
    }

    fn exact_moments(&self) -> Option<&RewardMoments> {
        self.moments.as_ref()
    }
}

fn normal(mean: f64, variance: f64) -> Normal<f64> {
    Normal::new(mean, variance.sqrt()).expect("finite, non-negative variance")
}

// ---------------------------------------------------------------------------
// Reward chains

pub const CHAIN_LENGTH: usize = 10;

/// Deterministic walk through `length` timesteps with a single stochastic
/// reward at `reward_step`: `N(3, 10)` for action 0 and `N(2, 10)` for action 1.
#[derive(Debug, Clone)]
pub struct ChainEnv {
    pub length: usize,
    pub reward_step: usize,
    pub means: [f64; 2],
    pub variance: f64,
}

impl ChainEnv {
    pub fn new(length: usize, reward_step: usize) -> Self {
        ChainEnv {
            length,
            reward_step,
            means: [3.0, 2.0],
            variance: 10.0,
        }
    }

    /// Exact reward moments under the uniform-random policy.
    pub fn uniform_policy_moments(&self) -> RewardMoments {
        let mean = 0.5 * (self.means[0] + self.means[1]);
        let spread = 0.25 * (self.means[0] - self.means[1]).powi(2);
        let mut means = vec![0.0; self.length];
        let mut variances = vec![0.0; self.length];
        means[self.reward_step] = mean;
        variances[self.reward_step] = self.variance + spread;
        RewardMoments {
            means,
            variances,
            covariances: UpperTriangular::zeros(self.length),
        }
    }
}

impl Environment for ChainEnv {
    type State = usize;
    type Action = usize;

    fn reset<R: Rng + ?Sized>(&self, _rng: &mut R) -> usize {
        0
    }

    fn step<R: Rng + ?Sized>(&self, &t: &usize, &a: &usize, rng: &mut R) -> (usize, f64) {
        let reward = if t == self.reward_step {
            normal(self.means[a], self.variance).sample(rng)
        } else {
            0.0
        };
        (t + 1, reward)
    }
}

/// Picks action 0 or 1 with equal probability.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformBinaryPolicy;

impl Policy<usize> for UniformBinaryPolicy {
    type Action = usize;

    fn act<R: Rng + ?Sized>(&self, _state: &usize, rng: &mut R) -> usize {
        usize::from(rng.random_bool(0.5))
    }
}

/// Reward only at the last of ten steps.
pub fn make_terminal_chain() -> (ChainEnv, UniformBinaryPolicy) {
    (ChainEnv::new(CHAIN_LENGTH, CHAIN_LENGTH - 1), UniformBinaryPolicy)
}

/// Reward only at the first of ten steps.
pub fn make_first_step_chain() -> (ChainEnv, UniformBinaryPolicy) {
    (ChainEnv::new(CHAIN_LENGTH, 0), UniformBinaryPolicy)
}

fn chain_task(
    name: &str,
    (env, policy): (ChainEnv, UniformBinaryPolicy),
    gamma: f64,
) -> Result<EvalTask<ChainEnv, UniformBinaryPolicy>> {
    let moments = env.uniform_policy_moments();
    let horizon = env.length;
    Ok(EvalTask::new(name, env, policy, horizon, gamma)?.with_moments(moments))
}

pub fn terminal_chain_task(gamma: f64) -> Result<EvalTask<ChainEnv, UniformBinaryPolicy>> {
    chain_task("terminal-chain", make_terminal_chain(), gamma)
}

pub fn first_step_chain_task(gamma: f64) -> Result<EvalTask<ChainEnv, UniformBinaryPolicy>> {
    chain_task("first-step-chain", make_first_step_chain(), gamma)
}

// ---------------------------------------------------------------------------
// Scalar LQG

/// `s' = s + (a + xi) + eta`, with the cost `s^2 + (a + xi)^2` emitted as a
/// negative reward.
#[derive(Debug, Clone)]
pub struct LqgEnv {
    pub init_bound: f64,
    pub state_noise_var: f64,
    pub control_noise_var: f64,
}

impl Default for LqgEnv {
    fn default() -> Self {
        LqgEnv {
            init_bound: 80.0,
            state_noise_var: 0.1,
            control_noise_var: 0.1,
        }
    }
}

impl LqgEnv {
    pub fn noiseless() -> Self {
        LqgEnv {
            state_noise_var: 0.0,
            control_noise_var: 0.0,
            ..Self::default()
        }
    }

    /// `E[R_t]` for `t < horizon` under the feedback `a = -gain * s`.
    pub fn expected_rewards(&self, gain: f64, horizon: usize) -> Vec<f64> {
        let closed = (1.0 - gain).powi(2);
        let mut second = self.init_bound * self.init_bound / 3.0;
        let mut out = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            out.push(-((1.0 + gain * gain) * second + self.control_noise_var));
            second = closed * second + self.control_noise_var + self.state_noise_var;
        }
        out
    }
}

impl Environment for LqgEnv {
    type State = f64;
    type Action = f64;

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.random_range(-self.init_bound..=self.init_bound)
    }

    fn step<R: Rng + ?Sized>(&self, &s: &f64, &a: &f64, rng: &mut R) -> (f64, f64) {
        let xi = normal(0.0, self.control_noise_var).sample(rng);
        let eta = normal(0.0, self.state_noise_var).sample(rng);
        let applied = a + xi;
        (s + applied + eta, -(s * s + applied * applied))
    }
}

/// `a = -gain * s`.
#[derive(Debug, Clone, Copy)]
pub struct LinearPolicy {
    pub gain: f64,
}

impl Policy<f64> for LinearPolicy {
    type Action = f64;

    fn act<R: Rng + ?Sized>(&self, &s: &f64, _rng: &mut R) -> f64 {
        -self.gain * s
    }
}

/// Fixed point of the discounted scalar Riccati recursion for `s' = s + a`
/// with unit state and action costs.
#[derive(Debug, Clone, Copy)]
pub struct RiccatiSolution {
    pub cost_to_go: f64,
    pub gain: f64,
    pub iterations: usize,
    /// `|P_{k+1} - P_k|` at the last iteration.
    pub last_step: f64,
}

pub fn solve_scalar_riccati(gamma: f64) -> RiccatiSolution {
    const TOL: f64 = 1e-12;
    let (a, b, q, r) = (1.0, 1.0, 1.0, 1.0);
    let mut p = q;
    let mut iterations = 0;
    let mut last_step = f64::INFINITY;
    while last_step >= TOL && iterations < 10_000 {
        let next = q + gamma * a * p * a
            - (gamma * a * p * b).powi(2) / (r + gamma * b * p * b);
        last_step = (next - p).abs();
        p = next;
        iterations += 1;
    }
    let gain = gamma * b * p * a / (r + gamma * b * p * b);
    RiccatiSolution {
        cost_to_go: p,
        gain,
        iterations,
        last_step,
    }
}

pub fn make_lqg(gamma: f64) -> (LqgEnv, LinearPolicy) {
    let sol = solve_scalar_riccati(gamma);
    (LqgEnv::default(), LinearPolicy { gain: sol.gain })
}

pub const LQG_DEFAULT_HORIZON: usize = 50;

pub fn lqg_task(gamma: f64, horizon: usize) -> Result<EvalTask<LqgEnv, LinearPolicy>> {
    let (env, policy) = make_lqg(gamma);
    let means = env.expected_rewards(policy.gain, horizon);
    Ok(EvalTask::new("lqg", env, policy, horizon, gamma)?.with_expected_rewards(means))
}

// ---------------------------------------------------------------------------
// 2-D navigation

/// Point agent in `[0, 92]^2` steering toward a goal disc around `(91, 91)`.
#[derive(Debug, Clone)]
pub struct NavigationEnv {
    pub size: f64,
    pub goal: [f64; 2],
    pub goal_radius: f64,
    pub start_bound: f64,
    pub action_noise_var: f64,
    pub goal_reward_mean: f64,
    pub goal_reward_var: f64,
}

impl Default for NavigationEnv {
    fn default() -> Self {
        NavigationEnv {
            size: 92.0,
            goal: [91.0, 91.0],
            goal_radius: 1.0,
            start_bound: 5.0,
            action_noise_var: 0.1,
            goal_reward_mean: 1.0,
            goal_reward_var: 1.0,
        }
    }
}

impl NavigationEnv {
    pub fn in_goal(&self, s: &[f64; 2]) -> bool {
        let dx = s[0] - self.goal[0];
        let dy = s[1] - self.goal[1];
        (dx * dx + dy * dy).sqrt() <= self.goal_radius
    }
}

impl Environment for NavigationEnv {
    type State = [f64; 2];
    type Action = [f64; 2];

    fn reset<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 2] {
        [
            rng.random_range(0.0..=self.start_bound),
            rng.random_range(0.0..=self.start_bound),
        ]
    }

    fn step<R: Rng + ?Sized>(&self, s: &[f64; 2], a: &[f64; 2], rng: &mut R) -> ([f64; 2], f64) {
        let mut next = [0.0; 2];
        for i in 0..2 {
            let q = normal(a[i], self.action_noise_var).sample(rng);
            next[i] = (s[i] + q).clamp(0.0, self.size);
        }
        let reward = if self.in_goal(&next) {
            normal(self.goal_reward_mean, self.goal_reward_var).sample(rng)
        } else {
            0.0
        };
        (next, reward)
    }
}

/// Moves each coordinate toward the goal by at most one unit.
#[derive(Debug, Clone, Copy)]
pub struct GreedyPolicy {
    pub goal: [f64; 2],
}

impl Policy<[f64; 2]> for GreedyPolicy {
    type Action = [f64; 2];

    fn act<R: Rng + ?Sized>(&self, s: &[f64; 2], _rng: &mut R) -> [f64; 2] {
        [
            (self.goal[0] - s[0]).clamp(-1.0, 1.0),
            (self.goal[1] - s[1]).clamp(-1.0, 1.0),
        ]
    }
}

pub fn make_navigation2d() -> (NavigationEnv, GreedyPolicy) {
    let env = NavigationEnv::default();
    let goal = env.goal;
    (env, GreedyPolicy { goal })
}

/// Long enough for the greedy policy to reach the goal from the start square.
pub const NAVIGATION_DEFAULT_HORIZON: usize = 130;

pub fn navigation_task(gamma: f64, horizon: usize) -> Result<EvalTask<NavigationEnv, GreedyPolicy>> {
    let (env, policy) = make_navigation2d();
    EvalTask::new("navigation", env, policy, horizon, gamma)
}

// ---------------------------------------------------------------------------
// Lookup by name

/// The built-in environments, addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvKind {
    TerminalChain,
    FirstStepChain,
    Lqg,
    Navigation,
}

impl EnvKind {
    pub const ALL: [EnvKind; 4] = [
        EnvKind::TerminalChain,
        EnvKind::FirstStepChain,
        EnvKind::Lqg,
        EnvKind::Navigation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::TerminalChain => "terminal-chain",
            EnvKind::FirstStepChain => "first-step-chain",
            EnvKind::Lqg => "lqg",
            EnvKind::Navigation => "navigation",
        }
    }

    pub fn default_horizon(self) -> usize {
        match self {
            EnvKind::TerminalChain | EnvKind::FirstStepChain => CHAIN_LENGTH,
            EnvKind::Lqg => LQG_DEFAULT_HORIZON,
            EnvKind::Navigation => NAVIGATION_DEFAULT_HORIZON,
        }
    }

    /// Builds the task; `horizon` defaults per environment. Chains only
    /// support their fixed length.
    pub fn task(self, gamma: f64, horizon: Option<usize>) -> Result<Box<dyn Rollout>> {
        let horizon = horizon.unwrap_or(self.default_horizon());
        Ok(match self {
            EnvKind::TerminalChain | EnvKind::FirstStepChain => {
                if horizon == 0 {
                    return Err(Error::InvalidTask("horizon must be positive".into()));
                }
                let step = if self == EnvKind::TerminalChain { horizon - 1 } else { 0 };
                let env = ChainEnv::new(horizon, step);
                Box::new(chain_task(self.name(), (env, UniformBinaryPolicy), gamma)?)
            }
            EnvKind::Lqg => Box::new(lqg_task(gamma, horizon)?),
            EnvKind::Navigation => Box::new(navigation_task(gamma, horizon)?),
        })
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnvKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                Error::ConfigInvalid(format!(
                    "unknown environment `{s}` (expected one of: terminal-chain, first-step-chain, lqg, navigation)"
                ))
            })
    }
}
