//! `qckit` batch front end. One command per process; exit codes are the API:
//! 0 success, 1 invalid input, 2 a residual above its gate.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qckit::grid::GridSpec;

use crate::output::{CliError, Format};

#[derive(Debug, Parser)]
#[command(name = "qckit", version, about = "Almost periodic multisets, spectra and canonical products")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Write the result here instead of stdout (atomically)
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Gate on the reported residual; exceeding it exits with status 2
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,

    /// Symmetric index cutoff N of products and zero sums
    #[arg(long, global = true)]
    pub truncation: Option<usize>,

    /// Add the ∓πi·b_0 term to the spectral log-derivative
    #[arg(long, global = true)]
    pub include_zero_atom: Option<bool>,

    /// Evaluation grid as x0:x1:step@y
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub grid: Option<GridSpec>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a multiset from a generator spec (lattice, union, trigpoly)
    Generate(InputArg),
    /// Density from count/length over several window lengths
    Density {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, value_delimiter = ',', default_values_t = [1e2, 1e3])]
        lengths: Vec<f64>,
    },
    /// Decompose a_n = n/d + φ(n)
    Decompose {
        #[command(flatten)]
        input: InputArg,
        /// Density d; estimated from half the window when omitted
        #[arg(long)]
        density: Option<f64>,
    },
    /// Scan translations for ε-almost periods
    AlmostPeriods {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        epsilon: f64,
        /// lo:hi
        #[arg(long, allow_hyphen_values = true)]
        tau_range: String,
        #[arg(long, default_value_t = 1e-3)]
        tau_step: f64,
    },
    /// Analytic spectrum of a generator spec, or Bohr-mean spectrum of a multiset
    Spectrum {
        #[command(flatten)]
        input: InputArg,
        /// lo:hi
        #[arg(long, allow_hyphen_values = true)]
        band: String,
        /// Base frequencies whose integer combinations are tested (empirical mode)
        #[arg(long, value_delimiter = ',')]
        freqs: Vec<f64>,
        #[arg(long, default_value_t = 2)]
        order: u32,
    },
    /// Evaluate f, a log-derivative, g or F on a grid
    Evaluate {
        #[arg(long, value_enum)]
        function: Function,
        /// Multiset (path or inline JSON), for f, logderiv-direct and F
        #[arg(long)]
        input: Option<String>,
        /// Spectrum (path or inline JSON), for logderiv-spectral, g and F
        #[arg(long)]
        spectrum: Option<String>,
    },
    /// Numerical identities with residual reports
    #[command(subcommand)]
    Verify(Verify),
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// Σ c_λ ĥ(λ) = Σ b_γ h(γ) for a Gaussian h
    Poisson {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        spectrum: String,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long, default_value_t = 0.0)]
        center: f64,
        #[arg(long)]
        lambda_cutoff: f64,
        /// Defaults to the lambda cutoff
        #[arg(long)]
        gamma_cutoff: Option<f64>,
        #[arg(long, default_value_t = 1e-12)]
        tail_tolerance: f64,
    },
    /// Direct against spectral log-derivative on the grid
    Identity {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        spectrum: String,
    },
}

#[derive(Debug, Args)]
pub struct InputArg {
    /// Path, "-" for stdin, or inline JSON
    #[arg(long)]
    pub input: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Function {
    /// canonical product f
    #[value(name = "f")]
    Product,
    LogderivDirect,
    LogderivSpectral,
    G,
    /// e^g f
    #[value(name = "F")]
    Corrected,
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("QCKIT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("QCKIT_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return output::report_error(&CliError::Usage(e.to_string()));
        }
    };
    let result = configure_threads().and_then(|()| commands::run(&cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => output::report_error(&e),
    }
}
