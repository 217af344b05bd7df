//! `conebessel`: evaluate Bessel functions of matrix argument, run
//! verification suites, and sample Bessel convolutions.
//!
//! Exit codes: 0 success, 1 invalid input, 2 a verification check failed,
//! 3 a series or quadrature did not converge.

mod config;
mod eval;
mod output;
mod sample;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "conebessel", version, about)]
struct Cli {
    /// Worker threads for Monte Carlo estimates.
    #[arg(long, global = true, env = "CONEBESSEL_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate a Bessel function or character on a grid.
    Eval(eval::EvalArgs),
    /// Run a verification suite; exits 2 if any check fails.
    Verify(verify::VerifyArgs),
    /// Draw points from a convolution of two point masses.
    Sample(sample::SampleArgs),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] conebessel::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_non_convergence() => 3,
            _ => 1,
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    let (table, cfg, pass) = match &cli.command {
        Command::Eval(a) => {
            let (t, c) = eval::run(a)?;
            (t, c, true)
        }
        Command::Verify(a) => verify::run(a)?,
        Command::Sample(a) => {
            let (t, c) = sample::run(a)?;
            (t, c, true)
        }
    };
    table.write(cfg.format, cfg.out.as_deref())?;
    if let Command::Verify(_) = cli.command {
        let failed = table.rows.iter().filter(|r| r[4] == output::Cell::Bool(false)).count();
        let status = if pass { "PASS" } else { "FAIL" };
        eprintln!("{status}: {} of {} checks passed", table.rows.len() - failed, table.rows.len());
    }
    Ok(pass)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap would exit 2 on usage errors, which is reserved for failed checks
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
