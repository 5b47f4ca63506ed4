//! `gfdm`: run single solves, convergence studies, node-fraction tables and
//! solver benchmarks from a plain-text configuration file.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::CliError;
use config::{Command, RawConfig, RunConfig};

#[derive(Parser)]
#[command(name = "gfdm", version, about = "Meshfree Poisson solver for discontinuous diffusivity")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve one case and write solution, report and cloud files.
    Run(Common),
    /// Error and order over a range of levels, optionally an error-vs-jump sweep.
    Convergence(Common),
    /// Node fractions of the hybrid selection over a range of jumps.
    Fractions(Common),
    /// Iteration counts and mean timings of strong vs hybrid solves.
    Bench(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cloud seed; overrides `seed` in the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(command: Command, args: Common) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let raw = RawConfig::parse(&text).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut cfg = RunConfig::resolve(&raw, command).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(out) = args.out {
        cfg.out = out;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    match command {
        Command::Run => commands::run(&cfg, &raw),
        Command::Convergence => commands::convergence(&cfg, &raw),
        Command::Fractions => commands::fractions(&cfg, &raw),
        Command::Bench => commands::bench(&cfg, &raw),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (command, args) = match cli.command {
        Cmd::Run(a) => (Command::Run, a),
        Cmd::Convergence(a) => (Command::Convergence, a),
        Cmd::Fractions(a) => (Command::Fractions, a),
        Cmd::Bench(a) => (Command::Bench, a),
    };
    match execute(command, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Usage(_) | CliError::Io(_) => ExitCode::from(1),
                CliError::Numerical(_) | CliError::Failed(_) => ExitCode::from(2),
            }
        }
    }
}
