//! How far the uniform and robust schedules can be from optimal when all
//! the variance sits at the first step.

use rido::bench::proposition_checks;
use rido::Result;

fn main() -> Result<()> {
    let report = proposition_checks()?;
    report.write_csv(std::io::stdout())?;
    eprintln!("ratios grow with the horizon: {}", report.grows_with_horizon());
    Ok(())
}
