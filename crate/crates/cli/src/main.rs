use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use cdstate_cli::{commands, config};
use clap::{Parser, Subcommand};

/// Continuous-discrete state estimation benchmark on the four-tank system.
#[derive(Parser)]
#[command(version)]
struct Cli {
    /// TOML configuration; defaults are used for anything not set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated filters to run, e.g. `ekf,pf`.
    #[arg(long, global = true)]
    filters: Option<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the plant and write truth.csv.
    Simulate,
    /// Run the filters on an existing truth CSV.
    Estimate {
        /// Truth CSV; defaults to truth.csv in the output directory.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Also write every EnKF/PF member after each update.
        #[arg(long)]
        dump_particles: bool,
    },
    /// Simulate, estimate and summarize.
    Bench {
        /// Also write every EnKF/PF member after each update.
        #[arg(long)]
        dump_particles: bool,
        /// Run this many consecutive seeds and report MAPE statistics.
        #[arg(long)]
        seeds: Option<u64>,
    },
    /// Run the reference checks.
    Check,
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = config::resolve(cli.config.as_deref(), cli.seed, cli.filters.as_deref())?;
    match cli.command {
        Command::Simulate => {
            let path = commands::simulate(&cfg, &cli.out)?;
            println!("wrote {}", path.display());
        }
        Command::Estimate { truth, dump_particles } => {
            let truth = truth.unwrap_or_else(|| cli.out.join("truth.csv"));
            print!("{}", commands::estimate_from(&cfg, &truth, &cli.out, dump_particles)?.to_text());
        }
        Command::Bench { dump_particles, seeds } => match seeds {
            Some(n) => print!("{}", commands::bench_seeds(&cfg, &cli.out, n, dump_particles)?),
            None => print!("{}", commands::bench(&cfg, &cli.out, dump_particles)?.to_text()),
        },
        Command::Check => {
            let (report, passed) = commands::check(&cfg)?;
            print!("{report}");
            return Ok(passed);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
