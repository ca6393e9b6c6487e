use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rido::allocator::{brute_force_oracle, ORACLE_MAX_BUDGET, ORACLE_MAX_HORIZON};
use rido::bench::{
    evaluate_strategy, optimal_dcs, write_results_csv, write_trace_csv, BenchConfig, Strategy,
    SweepConfig, DEFAULT_GROUND_TRUTH_COUNT,
};
use rido::estimator::deterministic_variance;
use rido::{robust_dcs, run_rido, uniform_dcs, EnvKind, Error, Result, RidoConfig};

#[derive(Parser)]
#[command(name = "rido", version, about = "Policy evaluation under a transition budget")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Benchmark one strategy on one environment.
    Run {
        #[arg(long)]
        env: EnvKind,
        #[arg(long)]
        strategy: Strategy,
        #[arg(long)]
        lambda: u64,
        #[arg(long)]
        gamma: f64,
        /// Mini-batch size (adaptive strategy only).
        #[arg(long, default_value_t = 1000)]
        batch: u64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = rido::bench::DEFAULT_RUNS)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_GROUND_TRUTH_COUNT)]
        ground_truth_count: usize,
        /// Write 0 in the `seconds` column.
        #[arg(long)]
        no_timing: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every combination listed in a TOML file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best integer schedule for the exact surrogate of an environment.
    Oracle {
        #[arg(long)]
        env: EnvKind,
        #[arg(long)]
        lambda: u64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Print a pre-determined schedule.
    Schedule {
        #[arg(long)]
        strategy: Strategy,
        #[arg(long)]
        lambda: u64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        horizon: usize,
    },
    /// Per-phase schedules of one adaptive run.
    Trace {
        #[arg(long)]
        env: EnvKind,
        #[arg(long)]
        lambda: u64,
        #[arg(long)]
        batch: u64,
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Error::ConfigInvalid(format!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn join(xs: &[u64]) -> String {
    xs.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            env,
            strategy,
            lambda,
            gamma,
            batch,
            beta,
            runs,
            seed,
            horizon,
            ground_truth_count,
            no_timing,
            out,
        } => {
            let task = env.task(gamma, horizon)?;
            let cfg = BenchConfig {
                batch,
                beta,
                ground_truth_count,
            };
            let result = evaluate_strategy(task.as_ref(), strategy, lambda, runs, &cfg, seed)?;
            write_results_csv(&[result], sink(out.as_deref())?, !no_timing)
        }
        Command::Sweep { config, out } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                Error::ConfigInvalid(format!("cannot read {}: {e}", config.display()))
            })?;
            let sweep = SweepConfig::from_toml(&text)?;
            let results = sweep.run()?;
            write_results_csv(&results, sink(out.as_deref())?, sweep.timing)
        }
        Command::Oracle {
            env,
            lambda,
            gamma,
            horizon,
        } => {
            let task = env.task(gamma, horizon)?;
            let f = task.exact_surrogate().ok_or_else(|| {
                Error::ConfigInvalid(format!("{env} has no closed-form reward moments"))
            })?;
            let (method, dcs, value) =
                if f.horizon() <= ORACLE_MAX_HORIZON && lambda <= ORACLE_MAX_BUDGET {
                    let (dcs, value) = brute_force_oracle(&f, lambda)?;
                    ("brute-force", dcs, value)
                } else {
                    let dcs = optimal_dcs(&f, lambda)?;
                    let value = deterministic_variance(&f, &dcs)?;
                    ("relaxed", dcs, value)
                };
            println!("method {method}");
            println!("dcs {}", join(dcs.as_slice()));
            println!("value {value}");
            Ok(())
        }
        Command::Schedule {
            strategy,
            lambda,
            gamma,
            horizon,
        } => {
            let dcs = match strategy {
                Strategy::Uniform => uniform_dcs(lambda, horizon)?,
                Strategy::Robust => {
                    let r = robust_dcs(lambda, horizon, gamma)?;
                    if r.below_threshold {
                        eprintln!("warning: budget below the closed-form threshold; floored allocation");
                    }
                    r.dcs
                }
                other => {
                    return Err(Error::ConfigInvalid(format!(
                        "`{other}` is not a pre-determined schedule"
                    )))
                }
            };
            println!("{}", join(dcs.as_slice()));
            Ok(())
        }
        Command::Trace {
            env,
            lambda,
            batch,
            beta,
            seed,
            gamma,
            horizon,
            out,
        } => {
            let task = env.task(gamma, horizon)?;
            let trace = run_rido(task.as_ref(), &RidoConfig::new(lambda, batch, beta, seed))?;
            write_trace_csv(&trace.phases, sink(out.as_deref())?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
