//! `tfcop`: build, check, sample and measure transformed copulas.
//!
//! Exit codes: 0 success, 1 config error, 2 validation failure,
//! 3 acceptance failure.

mod commands;
mod config;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "tfcop", version, about = "Transformed bivariate copulas")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON job configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// sample size
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// points per axis for grid checks
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// output file (report, CSV or suite directory depending on the command)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// scatter plot destination for `sample`
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    /// smaller samples and wider tolerances for `paper-suite`
    #[arg(long, global = true)]
    pub quick: bool,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Certify the configuration as a copula
    Validate,
    /// Draw a sample and write `u,v,on_diagonal` CSV
    Sample,
    /// Rank correlations, singular mass and tail coefficients
    Measure,
    /// Singular/absolutely continuous decomposition
    Singular,
    /// Upper and lower tail dependence
    Taildep,
    /// Total positivity of order 2
    Tp2,
    /// Pointwise order against a second configuration
    Concordance {
        #[arg(long)]
        against: PathBuf,
    },
    /// Run the reproduction matrix and write one report per row
    PaperSuite,
}

/// An error paired with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_ACCEPTANCE: u8 = 3;

impl Failure {
    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Failure { code: EXIT_CONFIG, error: error.into() }
    }
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("TFCOP_THREADS") else { return Ok(()) };
    let k: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&k| k > 0)
        .ok_or_else(|| Failure::config(anyhow::anyhow!("TFCOP_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new().num_threads(k).build_global().map_err(Failure::config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let t0 = Instant::now();
    let outcome = init_threads().and_then(|_| commands::run(&cli));
    eprintln!("elapsed: {:.2?}", t0.elapsed());
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
