//! Experiment runner: resolves settings, runs one subcommand under a fixed
//! worker count and writes its report.

pub mod config;
pub mod experiments;

use std::io::Write;

use broadcast_recon::par::with_workers;
use broadcast_recon::ReconError;
use clap::Parser;

pub use config::{Command, Flags, RunConfig};
pub use experiments::{Check, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad settings; the binary exits with code 2.
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Run(#[from] ReconError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "recon", version, about = "Reconstruction experiments for the colouring broadcast model on trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

/// Resolve settings and run `cmd`. Output files are not written here.
pub fn execute(cmd: Command, flags: &Flags) -> Result<(RunConfig, Outcome), CliError> {
    let cfg = RunConfig::resolve(cmd, flags)?;
    let out = with_workers(flags.workers, || match cmd {
        Command::Thresholds => experiments::thresholds(&cfg),
        Command::Population => experiments::population(&cfg, flags.measure_out.as_deref()),
        Command::FullVsReduced => experiments::full_vs_reduced(&cfg),
        Command::BpOracle => experiments::bp_oracle(&cfg),
        Command::StableLaw => experiments::stable_law(&cfg),
        Command::VerifyDominance => experiments::verify(&cfg),
        Command::AliceBob => experiments::alice_bob(&cfg, flags.board_out.as_deref(), flags.tree_out.as_deref()),
    })?;
    Ok((cfg, out))
}

/// Full binary behaviour minus process exit: returns the exit code.
pub fn main_with(cli: Cli) -> i32 {
    let flags = match cli.flags.with_file() {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let (cfg, out) = match execute(cli.command, &flags) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let written = match &flags.out {
        Some(p) => std::fs::write(p, &out.report),
        None => std::io::stdout().write_all(out.report.as_bytes()),
    };
    let written = written.and_then(|_| out.side_files.iter().try_for_each(|(p, s)| std::fs::write(p, s)));
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return 1;
    }
    eprint!("{}", experiments::summary(&out.checks));
    if cfg.check && out.checks.iter().any(|c| !c.passed) {
        eprintln!("check failed");
        return 1;
    }
    0
}
