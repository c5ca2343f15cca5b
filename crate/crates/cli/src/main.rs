use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cfrac_cli::{run, CliError, JobConfig, Mode, Overrides};

#[derive(Parser)]
#[command(name = "cfrac", version, about = "Interpolating continued fractions for functions and integral functionals")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    /// Job config (JSON)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path (model, kernel table, residual matrix or reduction table)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Number of grid cells
    #[arg(long, global = true)]
    grid: Option<usize>,

    /// Tolerance for verify and reduce-check
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a classical C-fraction to node/value pairs
    FitFn,
    /// Evaluate a fitted model
    EvalFn {
        /// Comma-separated evaluation points
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        at: Option<Vec<f64>>,
    },
    /// Compute the kernels of the integral fraction
    FitFunctional,
    /// Check the interpolation conditions on all continual nodes
    Verify,
    /// Compare integrated kernels with the point fraction for constant nodes
    ReduceCheck,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (mode, at) = match cli.command {
        None => (None, None),
        Some(Command::FitFn) => (Some(Mode::FitFn), None),
        Some(Command::EvalFn { ref at }) => (Some(Mode::EvalFn), at.clone()),
        Some(Command::FitFunctional) => (Some(Mode::FitFunctional), None),
        Some(Command::Verify) => (Some(Mode::Verify), None),
        Some(Command::ReduceCheck) => (Some(Mode::ReduceCheck), None),
    };
    let cfg = match &cli.config {
        Some(path) => JobConfig::load(path)?,
        None => JobConfig::default(),
    };
    let job = cfg.into_job(Overrides {
        mode,
        out: cli.out,
        grid: cli.grid,
        tol: cli.tol,
        at,
    })?;
    run(&job, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
