use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use rayon::prelude::*;

use rido::envs::{
    first_step_chain_task, lqg_task, make_navigation2d, navigation_task, terminal_chain_task,
    Environment, Policy, Rollout,
};
use rido::estimator::{exact_surrogate, UpperTriangular};
use rido::rng::{derive_seed, trajectory_rng};
use rido::{deterministic_variance, empirical_std, run_fixed, uniform_dcs, DcsCumulative};

fn estimates(task: &dyn Rollout, n: &DcsCumulative, runs: u64, seed: u64) -> Vec<f64> {
    (0..runs)
        .into_par_iter()
        .map(|r| run_fixed(task, n, derive_seed(seed, r)).unwrap().1)
        .collect()
}

fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    (m, xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
}

#[test]
fn unbiased_on_lqg_with_truncated_schedule() {
    let task = lqg_task(0.9, 8).unwrap();
    let n = DcsCumulative::new(vec![6, 5, 5, 4, 3, 3, 2, 1]).unwrap();
    let est = estimates(&task, &n, 10_000, 1);
    let (mean, var) = mean_var(&est);
    let truth = task.exact_return().unwrap();
    assert!((mean - truth).abs() <= 3.0 * (var / est.len() as f64).sqrt(), "{mean} vs {truth}");
}

#[test]
fn unbiased_on_first_step_chain() {
    let task = first_step_chain_task(0.8).unwrap();
    let n = DcsCumulative::new(vec![9, 7, 7, 5, 3, 3, 3, 2, 1, 1]).unwrap();
    let est = estimates(&task, &n, 10_000, 2);
    let (mean, var) = mean_var(&est);
    assert!((mean - 2.5).abs() <= 3.0 * (var / est.len() as f64).sqrt());
}

#[test]
fn variance_formula_on_terminal_chain() {
    let task = terminal_chain_task(0.9).unwrap();
    let n = DcsCumulative::new(vec![10, 8, 8, 6, 6, 5, 5, 5, 4, 3]).unwrap();
    let analytic = deterministic_variance(&task.exact_surrogate().unwrap(), &n).unwrap();
    let (_, var) = mean_var(&estimates(&task, &n, 100_000, 3));
    assert!((var - analytic).abs() / analytic < 0.03, "{var} vs {analytic}");
}

#[test]
fn empirical_std_converges() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let normal = Normal::new(1.0, 2.5).unwrap();
    let xs: Vec<f64> = (0..100_000).map(|_| normal.sample(&mut rng)).collect();
    assert!((empirical_std(&xs).unwrap() - 2.5).abs() / 2.5 < 0.01);

    let exp = Exp::new(0.5).unwrap();
    let xs: Vec<f64> = (0..100_000).map(|_| exp.sample(&mut rng)).collect();
    assert!((empirical_std(&xs).unwrap() - 2.0).abs() / 2.0 < 0.01);

    let xs: Vec<f64> = (0..100_000).map(|_| rng.random_range(0.0..1.0)).collect();
    let sd = (1.0f64 / 12.0).sqrt();
    assert!((empirical_std(&xs).unwrap() - sd).abs() / sd < 0.01);
}

#[test]
fn chain_reward_variance_matches_closed_form() {
    let task = terminal_chain_task(1.0).unwrap();
    let r9: Vec<f64> = (0..100_000)
        .map(|i| task.sample_rewards(10, &mut trajectory_rng(5, 10, i))[9])
        .collect();
    let (_, var) = mean_var(&r9);
    assert!((var - 10.25).abs() / 10.25 < 0.03, "{var}");
}

#[test]
fn zero_variance_means_zero_error() {
    let task = lqg_task(0.95, 6).unwrap();
    let noiseless = rido::envs::EvalTask::new(
        "noiseless",
        rido::envs::LqgEnv {
            init_bound: 0.0,
            ..rido::envs::LqgEnv::noiseless()
        },
        rido::envs::LinearPolicy { gain: 0.5 },
        6,
        0.95,
    )
    .unwrap();
    // Without noise and with the state starting at zero every reward is zero.
    let est = run_fixed(&noiseless, &uniform_dcs(60, 6).unwrap(), 9).unwrap().1;
    assert_eq!(est, 0.0);
    assert!(task.exact_return().unwrap() < 0.0);
}

#[test]
fn environments_are_seed_deterministic() {
    for task in [
        Box::new(terminal_chain_task(1.0).unwrap()) as Box<dyn Rollout>,
        Box::new(lqg_task(0.9, 20).unwrap()),
        Box::new(navigation_task(0.99, 130).unwrap()),
    ] {
        let h = task.horizon();
        let a = task.sample_rewards(h, &mut trajectory_rng(6, h, 3));
        let b = task.sample_rewards(h, &mut trajectory_rng(6, h, 3));
        let c = task.sample_rewards(h, &mut trajectory_rng(6, h, 4));
        assert_eq!(a, b);
        assert_ne!(a, c, "{}", task.name());
    }
}

#[test]
fn navigation_clamps_random_walks() {
    let (env, _) = make_navigation2d();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut s = env.reset(&mut rng);
    for _ in 0..1_000_000 {
        let a = [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)];
        s = env.step(&s, &a, &mut rng).0;
        assert!(s.iter().all(|x| (0.0..=92.0).contains(x)), "{s:?}");
    }
}

#[test]
fn greedy_policy_moves_toward_goal() {
    let (env, policy) = make_navigation2d();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let a = policy.act(&[10.0, 50.0], &mut rng);
    let (s, _) = env.step(&[10.0, 50.0], &a, &mut rng);
    assert!(s[0] > 10.0 && s[1] > 50.0);
}

fn psd_moments(horizon: usize, entries: &[f64]) -> (Vec<f64>, UpperTriangular) {
    // Sigma = A A^T is a valid covariance matrix.
    let a = |i: usize, k: usize| entries[i * horizon + k];
    let sigma = |i: usize, j: usize| (0..horizon).map(|k| a(i, k) * a(j, k)).sum::<f64>();
    let vars = (0..horizon).map(|i| sigma(i, i)).collect();
    (vars, UpperTriangular::from_fn(horizon, sigma))
}

proptest! {
    #[test]
    fn exact_surrogate_has_nonnegative_suffixes(
        horizon in 1usize..7,
        gamma in 0.05f64..=1.0,
        entries in proptest::collection::vec(-3.0f64..3.0, 49),
    ) {
        let (vars, covs) = psd_moments(horizon, &entries);
        let f = exact_surrogate(&vars, &covs, gamma).unwrap();
        for s in f.suffix_sums() {
            prop_assert!(s >= -1e-12, "{s}");
        }
    }
}
