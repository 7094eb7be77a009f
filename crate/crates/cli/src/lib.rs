//! `relstring` command line: one subcommand per experiment, a TOML config,
//! artifacts plus `report.json` in the output directory.
//!
//! Exit codes: 0 when every invariant holds, 1 when one fails, 2 on bad
//! input or I/O failure.

pub mod config;
pub mod error;
pub mod experiments;
pub mod initial;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use relstring::io::ExperimentReport;

use config::{load_config, ExperimentConfig, ExperimentId};
use error::CliError;
use experiments::Context;
use output::Output;

#[derive(Debug, Parser)]
#[command(name = "relstring", version, about = "Relativistic strings: exact solver, wave family and weak completion")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML (or JSON) experiment config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; defaults to the config's output_dir, then `out`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the experiment's main tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Exact evolution of configured initial data.
    Simulate,
    /// Convergence rates of the oscillating wave family.
    Thm1,
    /// Weak-* completion of the relativistic set.
    Completion,
    /// Seeded checks of the structural identities.
    Validate,
}

impl Command {
    fn id(self) -> ExperimentId {
        match self {
            Command::Simulate => ExperimentId::Simulate,
            Command::Thm1 => ExperimentId::Thm1,
            Command::Completion => ExperimentId::Completion,
            Command::Validate => ExperimentId::Validate,
        }
    }
}

fn context(cli: &Cli) -> Result<Context, CliError> {
    let id = cli.command.id();
    let config = match &cli.common.config {
        Some(p) => load_config(p)?,
        None if id == ExperimentId::Validate => ExperimentConfig::default(),
        None => return Err(CliError::Config(format!("{} needs --config", id.name()))),
    };
    if let Some(e) = config.experiment {
        if e != id {
            return Err(CliError::Config(format!("config is for {} but the subcommand is {}", e.name(), id.name())));
        }
    }
    let mut tolerances = config.tolerances.clone();
    if let Some(t) = cli.common.tol {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(CliError::Config(format!("--tol must be finite and non-negative, got {t}")));
        }
        match id {
            ExperimentId::Simulate => tolerances.constraint = t,
            ExperimentId::Thm1 => tolerances.rate_band = [2.0 - t, 2.0 + t],
            ExperimentId::Completion => tolerances.identity = t,
            ExperimentId::Validate => tolerances.equality = t,
        }
    }
    let dir = cli.common.out.clone().or_else(|| config.output_dir.as_ref().map(|p| config.resolve(p))).unwrap_or_else(|| PathBuf::from("out"));
    let seed = cli.common.seed.or(config.seed).unwrap_or(0);
    Ok(Context { out: Output::create(&dir)?, config, tolerances, seed, inject_fault: cli.common.inject_fault })
}

/// Runs one experiment and writes `report.json` next to its artifacts.
pub fn execute(cli: &Cli) -> Result<ExperimentReport, CliError> {
    let ctx = context(cli)?;
    let report = match cli.command {
        Command::Simulate => experiments::simulate::run(&ctx)?,
        Command::Thm1 => experiments::thm1::run(&ctx)?,
        Command::Completion => experiments::completion::run(&ctx)?,
        Command::Validate => experiments::validate::run(&ctx)?,
    };
    ctx.out.write("report.json", &report.to_json()?)?;
    Ok(report)
}

/// Parses the process arguments, runs, prints a summary and returns the
/// exit code.
pub fn run() -> u8 {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(report) => {
            for r in &report.results {
                println!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.name);
            }
            if report.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
