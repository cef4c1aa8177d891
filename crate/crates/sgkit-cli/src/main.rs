//! `sgkit` — command-line front end for the small-gain certificate toolkit.
//!
//! Subcommands:
//! - `check`     verify trapping/small-gain conditions for a scenario
//! - `simulate`  integrate a scenario's dynamics and classify the outcome
//! - `sweep`     repeat a simulation over a range of initial conditions
//! - `reproduce` regenerate the bundled end-to-end studies
//! - `fixtures`  list the scenarios embedded in the binary
//!
//! Exit codes: 0 = all requested conditions hold / run converged;
//! 1 = a condition failed, the run escaped, or the outcome is undecided;
//! 2 = usage or configuration error.

mod commands;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use commands::Which;
use scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "sgkit",
    version,
    about = "Small-gain certificates and adaptive-identifier simulations \
             for systems with weak attractors"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

/// Scenario source: exactly one of a TOML file or a bundled fixture.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Path to a scenario TOML file
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Name of a bundled fixture (see `sgkit fixtures`)
    #[arg(long, value_name = "NAME")]
    fixture: Option<String>,
}

impl Source {
    fn load(&self) -> Result<Scenario> {
        match (&self.config, &self.fixture) {
            (Some(path), None) => Ok(Scenario::from_path(path)?),
            (None, Some(name)) => Ok(scenario::fixture(name)?),
            _ => unreachable!("clap enforces exactly one source"),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify certificate conditions (trapping membership, small-gain
    /// existence, comparison-function admissibility, general schedule
    /// conditions) for a scenario
    Check {
        #[command(flatten)]
        src: Source,
        /// Print the full report as JSON on stdout
        #[arg(long)]
        json: bool,
        /// Directory for check.json
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Integrate the scenario's dynamical system and classify the outcome
    Simulate {
        #[command(flatten)]
        src: Source,
        /// Override the integration step size
        #[arg(long, value_name = "DT")]
        dt: Option<f64>,
        /// Override the integration horizon
        #[arg(long, value_name = "T")]
        horizon: Option<f64>,
        /// Print the run summary as JSON on stdout
        #[arg(long)]
        json: bool,
        /// Directory for trajectory.csv and summary.json
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Repeat the simulation with one initial-condition component swept
    /// across the configured values
    Sweep {
        #[command(flatten)]
        src: Source,
        /// Print the sweep rows as JSON on stdout
        #[arg(long)]
        json: bool,
        /// Directory for sweep.csv
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Regenerate the bundled studies: the constants table, the scalar
    /// parameter-identification fan, and the neuron observer run
    Reproduce {
        /// Which study to regenerate
        #[arg(long, value_enum, default_value_t = Which::All)]
        which: Which,
        /// Seed for the fan of initial conditions
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Number of fan members
        #[arg(long, default_value_t = 20)]
        members: usize,
        /// Shorten the scalar-example horizon (useful for smoke runs)
        #[arg(long, value_name = "T")]
        t_end_example1: Option<f64>,
        /// Shorten the neuron-example horizon (useful for smoke runs)
        #[arg(long, value_name = "T")]
        t_end_example2: Option<f64>,
        /// Output directory for CSVs and JSON summaries
        #[arg(long, default_value = "out", value_name = "DIR")]
        out: PathBuf,
        /// Print the aggregate summary as JSON on stdout
        #[arg(long)]
        json: bool,
    },
    /// List the fixture scenarios embedded in the binary
    Fixtures,
}

fn run(cli: Cli) -> Result<i32> {
    match cli.cmd {
        Cmd::Check { src, json, out } => {
            let scenario = src.load()?;
            commands::check(&scenario, out.as_deref(), json)
        }
        Cmd::Simulate {
            src,
            dt,
            horizon,
            json,
            out,
        } => {
            let scenario = src.load()?;
            commands::simulate(&scenario, dt, horizon, out.as_deref(), json)
        }
        Cmd::Sweep { src, json, out } => {
            let scenario = src.load()?;
            commands::sweep(&scenario, out.as_deref(), json)
        }
        Cmd::Reproduce {
            which,
            seed,
            members,
            t_end_example1,
            t_end_example2,
            out,
            json,
        } => commands::reproduce(
            which,
            seed,
            members,
            t_end_example1,
            t_end_example2,
            &out,
            json,
        ),
        Cmd::Fixtures => {
            for (name, text) in scenario::FIXTURES {
                let hook = text
                    .lines()
                    .find_map(|l| l.strip_prefix("# "))
                    .unwrap_or("");
                println!("{name:16} {hook}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
