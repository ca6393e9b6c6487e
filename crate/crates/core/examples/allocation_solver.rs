//! Grouping, the continuous solve, rounding and the exhaustive check.

use rido::allocator::{brute_force_oracle, group_partition, round_allocation, solve_grouped, Partition};
use rido::{Result, SurrogateCoefficients};

fn main() -> Result<()> {
    let cases: [&[f64]; 5] = [
        &[1.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0],
        &[-1.0, 2.0, 3.0],
        &[1.0, -2.0],
        &[-1.0, 0.5],
    ];
    for f in cases {
        let coeffs = SurrogateCoefficients::new(f.to_vec());
        let budget = 6;
        print!("f = {f:?}: ");
        match group_partition(&coeffs, budget) {
            Partition::UniformFallback => println!("ill-conditioned from step 0, spend uniformly"),
            Partition::Grouped(problem) => {
                let cont = solve_grouped(&problem)?;
                let n = round_allocation(&cont, budget)?;
                let (best, value) = brute_force_oracle(&coeffs, budget)?;
                println!(
                    "groups {:?}, continuous {:.3?}, rounded {:?}, exhaustive {:?} ({value:.3})",
                    problem.groups.iter().map(|g| (g.start, g.len)).collect::<Vec<_>>(),
                    cont.as_slice(),
                    n.as_slice(),
                    best.as_slice()
                );
            }
        }
    }
    Ok(())
}
