// SPDX-License-Identifier: Apache-2.0

//! `qthermal`: steady-state currents, working points and dynamics of the
//! three-level thermal device, driven by a JSON config and written as CSV.

mod commands;
mod config;
mod error;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{Outcome, Overrides};
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "qthermal",
    version,
    about = "Three-level, three-bath quantum thermal device simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for grid evaluations.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    threads: u16,
}

#[derive(Debug, Args)]
struct GridFlag {
    /// Override the grid range as START,STOP,POINTS.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(f64, f64, usize)>,
}

#[derive(Debug, Args)]
struct RootFlags {
    /// Work-bath temperature bracket LO,HI.
    #[arg(long, value_parser = parse_bracket)]
    bracket: Option<(f64, f64)>,
    /// Relative bisection tolerance on Tw.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Steady-state currents along a Tw or g grid (optionally nested).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridFlag,
    },
    /// Work-bath temperature at which the hot current vanishes.
    Valve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        root: RootFlags,
    },
    /// Work-bath temperature at which cooling of the cold bath sets in.
    Refrigerator {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        root: RootFlags,
    },
    /// Heat amplification factor |dJc/dJw| along a grid.
    Amplifier {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridFlag,
    },
    /// Infer the cold-bath temperature from the hot-current balance point.
    Thermometer {
        #[command(flatten)]
        common: Common,
        /// Bisection tolerance for the balance point.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Time evolution of the density matrix.
    Dynamics {
        #[command(flatten)]
        common: Common,
    },
    /// Heater/valve/refrigerator and amplifier classification over (g, Tw).
    PhaseMap {
        #[command(flatten)]
        common: Common,
        /// Override the Tw grid as START,STOP,POINTS.
        #[command(flatten)]
        grid: GridFlag,
    },
    /// Dump the 9x9 generator matrix.
    Generator {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_numbers(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(format!("expected {n} comma-separated values, got `{s}`"));
    }
    parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect()
}

fn parse_bracket(s: &str) -> Result<(f64, f64), String> {
    let v = parse_numbers(s, 2)?;
    Ok((v[0], v[1]))
}

fn parse_grid(s: &str) -> Result<(f64, f64, usize), String> {
    let (range, points) = s
        .rsplit_once(',')
        .ok_or_else(|| format!("expected START,STOP,POINTS, got `{s}`"))?;
    let v = parse_numbers(range, 2)?;
    let points = points
        .trim()
        .parse::<usize>()
        .map_err(|e| format!("points `{points}`: {e}"))?;
    Ok((v[0], v[1], points))
}

type Runner = fn(&RunConfig, Overrides) -> Result<Outcome, CliError>;

fn dispatch(command: Command) -> (Common, Overrides, Runner) {
    let none = Overrides::default();
    match command {
        Command::Sweep { common, grid } => (
            common,
            Overrides {
                grid: grid.grid,
                ..none
            },
            commands::sweep,
        ),
        Command::Valve { common, root } => (
            common,
            Overrides {
                bracket: root.bracket,
                tolerance: root.tolerance,
                ..none
            },
            commands::valve,
        ),
        Command::Refrigerator { common, root } => (
            common,
            Overrides {
                bracket: root.bracket,
                tolerance: root.tolerance,
                ..none
            },
            commands::refrigerator,
        ),
        Command::Amplifier { common, grid } => (
            common,
            Overrides {
                grid: grid.grid,
                ..none
            },
            commands::amplifier,
        ),
        Command::Thermometer { common, tolerance } => (
            common,
            Overrides { tolerance, ..none },
            commands::thermometer,
        ),
        Command::Dynamics { common } => (common, none, commands::dynamics),
        Command::PhaseMap { common, grid } => (
            common,
            Overrides {
                grid: grid.grid,
                ..none
            },
            commands::phase_map,
        ),
        Command::Generator { common } => (common, none, commands::generator),
    }
}

fn write_output(common: &Common, csv: &[u8]) -> Result<(), CliError> {
    match &common.out {
        Some(path) => std::fs::write(path, csv).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(csv)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io {
                    path: "<stdout>".into(),
                    source: e,
                })
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, overrides, runner) = dispatch(cli.command);
    let run_config = RunConfig::load(&common.config)?;
    if let Some(t) = overrides.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Usage(format!(
                "tolerance must be positive, got {t}"
            )));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.threads.into())
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let outcome = pool.install(|| runner(&run_config, overrides))?;
    write_output(&common, &outcome.csv)?;
    eprintln!("{}", outcome.summary);
    if outcome.failed_rows > 0 {
        return Err(CliError::FailedRows {
            failed: outcome.failed_rows,
            total: outcome.total_rows,
        });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(CliError::USAGE as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
