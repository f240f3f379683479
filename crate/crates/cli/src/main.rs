//! `frank-defect`: solve, evaluate and verify equivariant point-defect
//! profiles of the Oseen-Frank energy.

mod commands;
mod config;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Command, Flags, RunConfig, UsageError};

const USAGE: u8 = 2;
const FAILED: u8 = 1;

#[derive(Parser)]
#[command(name = "frank-defect", version, about = "Equivariant point defects of the Oseen-Frank energy")]
struct Cli {
    /// JSON file with the same keys as the flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Solve the profile ODE and write the profile table.
    Solve(Flags),
    /// Reduced energy breakdown of the solved profile.
    Energy(Flags),
    /// Run the invariant suite; exits 1 if any check fails.
    Verify(Flags),
    /// Energy, endpoint rates and degree over a range of t.
    Sweep(Flags),
    /// Minimality probes with seeded perturbations.
    Probe(Flags),
}

fn threads_from_env() -> Result<(), UsageError> {
    let Ok(raw) = std::env::var("FRANK_DEFECT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| UsageError(format!("FRANK_DEFECT_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| UsageError(e.to_string()))
}

fn resolve(cli: Cli) -> Result<RunConfig, UsageError> {
    let (command, flags) = match cli.command {
        Sub::Solve(f) => (Command::Solve, f),
        Sub::Energy(f) => (Command::Energy, f),
        Sub::Verify(f) => (Command::Verify, f),
        Sub::Sweep(f) => (Command::Sweep, f),
        Sub::Probe(f) => (Command::Probe, f),
    };
    let file = cli.config.as_deref().map(config::load_file).transpose()?;
    RunConfig::resolve(command, flags, file)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let cfg = match threads_from_env().and_then(|_| resolve(cli)) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(USAGE);
        }
    };
    let report = match commands::run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(FAILED);
        }
    };
    if let Err(e) = output::emit(cfg.out.as_deref(), &report.body) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(FAILED);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: {:?} reported failing checks", cfg.command);
        ExitCode::from(FAILED)
    }
}
