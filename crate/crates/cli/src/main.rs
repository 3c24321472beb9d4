//! `convdiff`: build, verify, and explore the convection-diffusion operator
//! from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification or residual failure,
//! 3 I/O failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::Shared;

#[derive(Debug, Parser)]
#[command(name = "convdiff", version, about = "Fourier-space toolkit for ε(sin x·y')' + y'")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write 𝒜, ℬ, 𝒞, 𝒥 and the M-matrix in band form
    Build {
        #[command(flatten)]
        shared: Shared,
    },
    /// Run the algebraic identity checks
    Verify {
        #[command(flatten)]
        shared: Shared,
        /// Flip the sign of one band of ℬ so the factorization check fails
        #[arg(long)]
        inject_fault: bool,
        /// Random polynomials per identity check
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Eigenvalues of 𝒜 at one truncation, or a convergence study over --n-list
    Spectrum {
        #[command(flatten)]
        shared: Shared,
        /// Eigenvalues tracked in a convergence study
        #[arg(long, default_value_t = 20)]
        k: usize,
    },
    /// Solve L y = φ with the explicit resolvent
    Resolve {
        #[command(flatten)]
        shared: Shared,
        /// builtin:cosx-image, builtin:sin2x-image, builtin:one, or a CSV file of n,re,im
        #[arg(long)]
        phi: String,
    },
    /// Audit the graph-norm/domain-norm equivalence on random polynomials
    Norms {
        #[command(flatten)]
        shared: Shared,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 10)]
        degree: usize,
    },
    /// Propagate an initial condition under y_t + L y = 0
    Evolve {
        #[command(flatten)]
        shared: Shared,
        /// Output times, comma separated; 0 is always included
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1")]
        times: Vec<f64>,
        /// builtin:cosx, builtin:sin2x, or a CSV file of n,re,im
        #[arg(long, default_value = "builtin:cosx")]
        y0: String,
        #[arg(long, default_value = "eigen")]
        method: String,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Verification(String),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl From<convdiff_core::Error> for CliError {
    fn from(e: convdiff_core::Error) -> Self {
        use convdiff_core::Error as E;
        match e {
            E::Io(_) | E::Json(_) => CliError::Io(e.to_string()),
            E::NoConvergence { .. }
            | E::Singular
            | E::Unsolvable { .. }
            | E::QuadratureFailure { .. }
            | E::EigendecompositionIllConditioned { .. } => CliError::Verification(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

/// Reads a polynomial from a CSV path, mapping a missing file to an I/O error.
pub fn read_poly(path: &str) -> Result<convdiff_core::TrigPoly, CliError> {
    let path = PathBuf::from(path);
    let file = std::fs::File::open(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    convdiff_core::io::read_trig_csv(file).map_err(CliError::from)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Build { shared } => commands::build(shared),
        Command::Verify {
            shared,
            inject_fault,
            samples,
        } => commands::verify(shared, inject_fault, samples),
        Command::Spectrum { shared, k } => commands::spectrum(shared, k),
        Command::Resolve { shared, phi } => commands::resolve(shared, &phi),
        Command::Norms {
            shared,
            samples,
            degree,
        } => commands::norms(shared, samples, degree),
        Command::Evolve {
            shared,
            times,
            y0,
            method,
        } => commands::evolve(shared, &times, &y0, &method),
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
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("convdiff: {e}");
            ExitCode::from(e.code())
        }
    }
}
