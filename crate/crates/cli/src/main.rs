use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Parser, Subcommand};
use taebp_cli::config::Config;
use taebp_cli::sweep::{parse_range, sweep, write_rows, Grid};
use taebp_cli::{analyze, simulate, verify};
use taebp_core::sim::{metrics_to_toml, PolicyKind};

/// Trust-aware embodied Bayesian persuasion: closed forms, simulation and
/// parameter sweeps for the AV/HV intersection game.
#[derive(Parser)]
#[command(name = "taebp", version)]
struct Cli {
    /// TOML config file; missing keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set intersection.theta=0.4`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Simulation seed; shorthand for `--set sim.seed=N`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory. Without it, `analyze` and `sweep` write to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Threshold, optimal nudge and scheme for the configured parameters.
    Analyze,
    /// Run the intersection simulator and write metrics, trace and scheme.
    Simulate {
        /// no-ebp, no-trust or taebp; shorthand for `--set sim.policy=...`.
        #[arg(long)]
        policy: Option<PolicyKind>,
    },
    /// Tabulate the construction over a grid. Ranges are `start:end:count`,
    /// comma lists or single values; omitted axes use the config value.
    Sweep {
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        theta: Option<String>,
        /// Also simulate every grid point with the `[sim]` settings.
        #[arg(long)]
        simulate: bool,
    },
    /// Run the built-in numerical checks; exits nonzero on any failure.
    Verify,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut overrides = cli.overrides.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("sim.seed={seed}"));
    }
    if let Command::Simulate {
        policy: Some(policy),
    } = &cli.command
    {
        overrides.push(format!("sim.policy=\"{}\"", policy.name()));
    }
    let config = Config::load(cli.config.as_deref(), &overrides)?;

    match cli.command {
        Command::Analyze => {
            let text = analyze::render(&analyze::analyze(&config)?)?;
            emit(cli.out, "analysis.toml", text.as_bytes())?;
        }
        Command::Simulate { .. } => {
            let out = cli.out.unwrap_or_else(|| PathBuf::from("taebp-out"));
            let result = simulate::simulate(&config.sim_config()?, &out)?;
            print!("{}", metrics_to_toml(&result.metrics));
            for file in &result.files {
                eprintln!("wrote {}", file.display());
            }
        }
        Command::Sweep {
            lambda,
            r,
            theta,
            simulate,
        } => {
            let p = config.intersection;
            let axis = |given: Option<String>, default: f64| match given {
                Some(text) => parse_range(&text),
                None => Ok(vec![default]),
            };
            let grid = Grid {
                lambda: axis(lambda, p.lambda)?,
                r: axis(r, p.r)?,
                theta: axis(theta, p.theta)?,
            };
            let sim = if simulate {
                Some(config.sim_config()?)
            } else {
                None
            };
            let rows = sweep(&grid, &config.model()?, sim.as_ref())?;
            let mut buf = Vec::new();
            write_rows(&rows, &mut buf)?;
            emit(cli.out, "sweep.csv", &buf)?;
        }
        Command::Verify => {
            let outcomes = verify::run_all();
            for outcome in &outcomes {
                println!("{outcome}");
            }
            if let Some(failed) = verify::first_failure(&outcomes) {
                bail!("verification failed: {}", failed.name);
            }
        }
    }
    Ok(())
}

/// Writes to `dir/name` when an output directory is given, else to stdout.
fn emit(dir: Option<PathBuf>, name: &str, bytes: &[u8]) -> Result<()> {
    match dir {
        Some(dir) => {
            fs::create_dir_all(&dir)?;
            let path = dir.join(name);
            fs::write(&path, bytes)?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}
