//! Uniform, robust and adaptive schedules on the scalar LQG task.

use rido::bench::{evaluate_strategy, BenchConfig, Strategy};
use rido::envs::{lqg_task, solve_scalar_riccati};
use rido::Result;

fn main() -> Result<()> {
    let cfg = BenchConfig {
        batch: 500,
        ..BenchConfig::default()
    };
    for gamma in [0.99, 0.9] {
        let task = lqg_task(gamma, 50)?;
        println!("gamma {gamma}: feedback gain {:.4}", solve_scalar_riccati(gamma).gain);
        for budget in [5000, 10_000] {
            for s in [Strategy::Uniform, Strategy::Robust, Strategy::Rido] {
                let r = evaluate_strategy(&task, s, budget, 100, &cfg, 1)?;
                println!("  L={budget:>6} {s:>8}: MSE {:>10.1} +- {:.1}", r.mse, r.ci95);
            }
        }
    }
    Ok(())
}
