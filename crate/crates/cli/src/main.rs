//! Command-line driver for the asymmetric vortex solver: reproducible
//! batch runs writing plot-ready CSV files and JSON summaries.
//!
//! Exit codes: 0 success, 2 configuration or I/O error, 3 convergence
//! failure, 4 numeric failure.  Errors print one JSON object to stderr.

mod commands;
mod params;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use vortex_core::error::VortexError;

use params::CommonFlags;

#[derive(Parser, Debug)]
#[command(
    name = "vortex",
    about = "Asymmetric Burgers vortices: limiting profiles, stationary solves, \
             perturbation evolution, spectra, and parameter sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Consistency reports available after a stationary solve.
#[derive(ValueEnum, Debug, Clone, Copy)]
enum SolveCheck {
    /// Quadratic smallness of the correction in the asymmetry.
    Lambda2,
    /// Approach to the limiting profile at large circulation.
    #[value(name = "largeR")]
    LargeR,
    /// Approach to the strained Gaussian at small circulation.
    #[value(name = "smallR")]
    SmallR,
}

/// Extra measurements available during evolution runs.
#[derive(ValueEnum, Debug, Clone, Copy)]
enum EvolveCheck {
    /// Double the amplitude until monotone decay fails.
    Basin,
}

/// Initial perturbation shape for evolution runs.
#[derive(ValueEnum, Debug, Clone, Copy)]
enum Perturb {
    /// First translation derivative of the vortex.
    D1,
    /// Second translation derivative of the vortex.
    D2,
    /// Seeded random zero-mean field.
    Random,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compute the limiting correction profile and its constants.
    Winfty {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Solve the stationary vortex at the given circulation and asymmetry.
    Solve {
        #[command(flatten)]
        common: CommonFlags,
        /// Also emit a consistency report.
        #[arg(long, value_enum)]
        check: Option<SolveCheck>,
        /// Circulations for the largeR/smallR reports.
        #[arg(long)]
        alphas: Option<String>,
    },
    /// Evolve a perturbation of the vortex and fit its decay rate.
    Evolve {
        #[command(flatten)]
        common: CommonFlags,
        /// Initial perturbation shape.
        #[arg(long, value_enum, default_value = "d2")]
        perturb: Perturb,
        /// Also estimate the attraction basin.
        #[arg(long, value_enum)]
        check: Option<EvolveCheck>,
    },
    /// Estimate the rightmost eigenvalues of the linearized operator.
    Spectrum {
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Solve a parameter grid and certify every point.
    Sweep {
        #[command(flatten)]
        common: CommonFlags,
        /// Comma-separated circulations.
        #[arg(long)]
        alphas: String,
        /// Comma-separated asymmetries.
        #[arg(long)]
        lambdas: String,
    },
    /// Run the built-in invariant suite, one pass/fail line each.
    Verify {
        #[command(flatten)]
        common: CommonFlags,
    },
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    field: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    history: Option<&'a [f64]>,
}

fn report_error(err: &VortexError) -> u8 {
    let (kind, code, field, iterations, residual, history) = match err {
        VortexError::Config { field, .. } => ("config", 2, Some(*field), None, None, None),
        VortexError::Domain(_) => ("domain", 2, None, None, None, None),
        VortexError::Io(_) => ("io", 2, None, None, None, None),
        VortexError::Json(_) => ("serialization", 2, None, None, None, None),
        VortexError::Convergence {
            iterations,
            residual,
            history,
        } => (
            "convergence",
            3,
            None,
            Some(*iterations),
            Some(*residual),
            Some(history.as_slice()),
        ),
        VortexError::Numeric(_) => ("numeric", 4, None, None, None, None),
    };
    let body = ErrorBody {
        kind,
        message: err.to_string(),
        field,
        iterations,
        residual,
        history,
    };
    match serde_json::to_string(&body) {
        Ok(text) => eprintln!("{text}"),
        Err(_) => eprintln!("{{\"kind\":\"{kind}\",\"message\":\"unserializable error\"}}"),
    }
    code
}

fn run(cli: Cli) -> Result<(), VortexError> {
    match cli.command {
        Command::Winfty { common } => commands::run_winfty(&common.resolve()?),
        Command::Solve {
            common,
            check,
            alphas,
        } => commands::run_solve(&common.resolve()?, check, alphas.as_deref()),
        Command::Evolve {
            common,
            perturb,
            check,
        } => commands::run_evolve(&common.resolve()?, perturb, check),
        Command::Spectrum { common } => commands::run_spectrum(&common.resolve()?),
        Command::Sweep {
            common,
            alphas,
            lambdas,
        } => commands::run_sweep(&common.resolve()?, &alphas, &lambdas),
        Command::Verify { common } => verify::run_verify(&common.resolve()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if err.use_stderr() {
                let body = ErrorBody {
                    kind: "usage",
                    message: err.to_string(),
                    field: None,
                    iterations: None,
                    residual: None,
                    history: None,
                };
                eprintln!("{}", serde_json::to_string(&body).unwrap_or_default());
                return ExitCode::from(2);
            }
            // Help and version requests print to stdout and succeed.
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => ExitCode::from(report_error(&err)),
    }
}
