//! `curlcurl`: batch experiments for the Maxwell fixed-point iteration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use curlcurl::ErrorClass;

mod commands;
mod config;
mod plot;
mod report;

use commands::{Context, Status};
use report::Timing;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(curlcurl::Error),
}

impl CliError {
    /// Input errors become configuration errors prefixed with `field`; the
    /// rest keep their class.
    pub fn field(field: &str, e: curlcurl::Error) -> Self {
        match e.class() {
            ErrorClass::Input => CliError::Config(format!("{field}: {e}")),
            _ => CliError::Core(e),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e.class() {
                ErrorClass::Input => 2,
                ErrorClass::Hypothesis => 3,
                ErrorClass::Numerical => 4,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "curlcurl",
    version,
    about = "Fixed-point solver and region explorer for curl(a curl u) + k^2 u = f"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Overrides `seed` from the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Omit wall-clock timing so repeated runs produce identical files.
    #[arg(long, global = true)]
    reproducible: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Run the iteration on one problem.
    Solve,
    /// Sample the admissible index region.
    Region,
    /// Compare measured contraction with the budget over a coefficient sweep.
    Contraction,
    /// Identity checks and Kato-Ponce estimates for the Bessel potential norms.
    Norms,
    /// Estimate operator norms of the unperturbed solution map.
    Msp,
}

fn run(cli: &Cli) -> Result<Status, CliError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut config = config::load(path)?;
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let ctx = Context {
        config,
        base,
        out_dir: &cli.out,
    };
    let start = Instant::now();
    let finished = match cli.command {
        Command::Solve => commands::solve(ctx),
        Command::Region => commands::region(ctx),
        Command::Contraction => commands::contraction(ctx),
        Command::Norms => commands::norms(ctx),
        Command::Msp => commands::msp(ctx),
    }?;
    let mut report = finished.report;
    if !cli.reproducible {
        report.timing = Some(Timing {
            elapsed_seconds: start.elapsed().as_secs_f64(),
        });
    }
    let report = finished.out.finish(report)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{}: wrote {} to {}",
        report.command,
        report.files.join(", "),
        cli.out.display()
    );
    Ok(finished.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Config) => ExitCode::from(2),
        Ok(Status::Hypothesis) => ExitCode::from(3),
        Ok(Status::Numerical) => ExitCode::from(4),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
