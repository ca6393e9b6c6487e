//! Adaptive allocation on the two reward chains.

use rido::bench::{evaluate_strategy, BenchConfig, Strategy};
use rido::envs::{first_step_chain_task, terminal_chain_task, Rollout};
use rido::{run_rido, Result, RidoConfig};

fn main() -> Result<()> {
    let tasks: [Box<dyn Rollout>; 2] = [
        Box::new(terminal_chain_task(1.0)?),
        Box::new(first_step_chain_task(1.0)?),
    ];
    let cfg = BenchConfig {
        batch: 1000,
        ..BenchConfig::default()
    };
    for task in &tasks {
        let trace = run_rido(task.as_ref(), &RidoConfig::new(10_000, 1000, 1.0, 7))?;
        println!("{}", task.name());
        for (i, p) in trace.phases.iter().enumerate() {
            println!("  phase {i}: {:?}", p.as_slice());
        }
        for s in [Strategy::Uniform, Strategy::Oracle, Strategy::Rido] {
            let r = evaluate_strategy(task.as_ref(), s, 10_000, 200, &cfg, 7)?;
            println!("  {s:>8}: MSE {:.5} +- {:.5}", r.mse, r.ci95);
        }
    }
    Ok(())
}
