//! Discount-driven schedules that need no knowledge of the rewards.

use rido::schedules::{robust_continuous, robust_dcs, robust_weights, uniform_dcs};
use rido::Result;

fn main() -> Result<()> {
    for gamma in [0.5, 0.9, 0.99] {
        let d = robust_weights(gamma, 10)?;
        let r = robust_dcs(10_000, 10, gamma)?;
        println!("gamma {gamma}: threshold budget {:.1}", d.min_budget());
        println!("  continuous {:.1?}", robust_continuous(10_000, 10, gamma)?);
        println!("  rounded    {:?}", r.dcs.as_slice());
    }
    // Below the threshold every step keeps at least one sample.
    let r = robust_dcs(50, 10, 0.01)?;
    println!("gamma 0.01, budget 50: {:?} (below threshold: {})", r.dcs.as_slice(), r.below_threshold);
    println!("uniform: {:?}", uniform_dcs(10_000, 10)?.as_slice());
    Ok(())
}
