//! Workbench entry point: model/config ingestion, command dispatch and
//! report emission.
//!
//! Exit codes: 0 success, 1 structural error (unreadable files, malformed
//! documents, missing sections), 2 validation failure (the report is still
//! written with the failure details).

use clap::{Parser, ValueEnum};
use korbit_core::orbits;
use korbit_core::report::{self, Command, RunConfig, RunError};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CliCommand {
    Validate,
    Geometry,
    Orbits,
    Casimirs,
    Defect,
    Lrep,
    Clifford,
    Fields,
    Semt,
}

impl From<CliCommand> for Command {
    fn from(c: CliCommand) -> Command {
        match c {
            CliCommand::Validate => Command::Validate,
            CliCommand::Geometry => Command::Geometry,
            CliCommand::Orbits => Command::Orbits,
            CliCommand::Casimirs => Command::Casimirs,
            CliCommand::Defect => Command::Defect,
            CliCommand::Lrep => Command::Lrep,
            CliCommand::Clifford => Command::Clifford,
            CliCommand::Fields => Command::Fields,
            CliCommand::Semt => Command::Semt,
        }
    }
}

/// Coadjoint-orbit workbench for Lie algebras given by structure constants.
#[derive(Parser, Debug)]
#[command(name = "korbit", version, about)]
struct Cli {
    /// Command to run against the model.
    #[arg(value_enum)]
    command: CliCommand,

    /// Model file (JSON: structure constants, subalgebra, metric, ...).
    #[arg(long)]
    model: PathBuf,

    /// Mode/quadrature config file (JSON), required by fields and semt.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Report output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Numerical tolerance for residual checks.
    #[arg(long, default_value_t = report::DEFAULT_TOL)]
    tol: f64,

    /// Seed for the deterministic covector sampling.
    #[arg(long, default_value_t = orbits::DEFAULT_SEED)]
    seed: u64,

    /// Casimir search degree (also used as the cap).
    #[arg(long = "max-degree", default_value_t = orbits::DEFAULT_MAX_DEGREE)]
    max_degree: u32,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = RunConfig {
        command: cli.command.into(),
        model_path: cli.model,
        config_path: cli.config,
        tol: cli.tol,
        seed: cli.seed,
        max_degree: cli.max_degree,
    };
    let started = Instant::now();
    match report::run(&cfg) {
        Ok(outcome) => {
            if let Err(e) = report::emit(&outcome, cli.out.as_deref()) {
                eprintln!("korbit: cannot write report: {e}");
                return ExitCode::from(1);
            }
            eprintln!(
                "korbit: {} finished in {:.1} ms ({})",
                cfg.command.name(),
                started.elapsed().as_secs_f64() * 1e3,
                if outcome.validation_failed { "validation failed" } else { "ok" }
            );
            if outcome.validation_failed {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(RunError::Load(e)) => {
            eprintln!("korbit: {e}");
            ExitCode::from(1)
        }
        Err(RunError::Structural(msg)) => {
            eprintln!("korbit: {msg}");
            ExitCode::from(1)
        }
    }
}
