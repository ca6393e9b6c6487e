//! Estimate a return from truncated trajectories and compare the observed
//! spread with the closed-form variance.

use rido::envs::{first_step_chain_task, Rollout};
use rido::rng::derive_seed;
use rido::{deterministic_variance, hoeffding_width, run_fixed, DcsCumulative, Result};

fn main() -> Result<()> {
    let task = first_step_chain_task(0.9)?;
    // 12 full trajectories, 4 more that stop after three steps.
    let n = DcsCumulative::new(vec![16, 16, 16, 12, 12, 12, 12, 12, 12, 12])?;
    println!("counts per length: {:?}", n.to_counts().as_slice());

    let (data, estimate) = run_fixed(&task, &n, 1)?;
    let moments = data.moments();
    println!("one run: J^ = {estimate:.4} (true {})", task.exact_return().unwrap());
    println!("sample std at t=0: {:.3}", moments.stds[0]);

    let f = task.exact_surrogate().unwrap();
    let analytic = deterministic_variance(&f, &n)?;
    let runs = 20_000;
    let est: Vec<f64> = (0..runs)
        .map(|r| run_fixed(&task, &n, derive_seed(2, r)).map(|x| x.1))
        .collect::<Result<_>>()?;
    let mean = est.iter().sum::<f64>() / runs as f64;
    let var = est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
    println!("Var(J^): observed {var:.4}, closed form {analytic:.4}");
    println!("Hoeffding width at delta=0.05: {:.3}", hoeffding_width(&n, 0.9, 0.05)?);
    Ok(())
}
