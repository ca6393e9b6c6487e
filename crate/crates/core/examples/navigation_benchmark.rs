//! Sparse goal reward in the 2D navigation task, written as CSV to stdout.

use rido::bench::{write_results_csv, SweepConfig};
use rido::Result;

const CONFIG: &str = r#"
seed = 1
runs = 100

[[experiment]]
env = "navigation"
strategies = ["uniform", "robust", "rido"]
lambdas = [13000, 26000]
gammas = [0.99, 0.95]
batch = 1300
"#;

fn main() -> Result<()> {
    let sweep = SweepConfig::from_toml(CONFIG)?;
    let results = sweep.run()?;
    write_results_csv(&results, std::io::stdout(), sweep.timing)
}
