//! `tandem`: exit probabilities of Markov-modulated tandem walks from a model file.

mod commands;
mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use tandem_core::{Error, ErrorClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Analyze,
    Approximate,
    Compare,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Analyze => "analyze",
            Command::Approximate => "approximate",
            Command::Compare => "compare",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "tandem", version, about = "Harmonic approximations and exact oracles for tandem walk exit probabilities")]
pub struct RunConfig {
    /// Model file (TOML)
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, value_enum)]
    pub command: Command,
    /// Circle points per conjugate family
    #[arg(long = "K", default_value_t = 5)]
    pub k: usize,
    /// Circle radius, in (0, 1)
    #[arg(long = "R", default_value_t = 0.7, value_parser = radius)]
    pub r: f64,
    /// Exit level for `compare`
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u64).range(2..))]
    pub n: u64,
    /// Relative convergence tolerance of the value iteration
    #[arg(long, default_value_t = 1e-12, value_parser = positive)]
    pub tol: f64,
    /// Output directory; nothing is written when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed of the Monte Carlo spot check in `compare`
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Strip width for the escape-probability grid in `compare`
    #[arg(long, value_parser = clap::value_parser!(u64).range(4..))]
    pub trunc: Option<u64>,
}

fn radius(s: &str) -> Result<f64, String> {
    let r: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if r > 0.0 && r < 1.0 {
        Ok(r)
    } else {
        Err("must lie strictly between 0 and 1".into())
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t > 0.0 && t.is_finite() {
        Ok(t)
    } else {
        Err("must be positive".into())
    }
}

/// Failure of a command, mapped onto the documented exit codes.
#[derive(Debug)]
pub enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Io(_) => 1,
        Failure::Core(e) => match e.class() {
            ErrorClass::Parse => 3,
            ErrorClass::Validation => 4,
            ErrorClass::Unsupported => 5,
            ErrorClass::Numeric => 6,
        },
    }
}

fn main() -> ExitCode {
    let config = RunConfig::parse();
    match commands::run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Core(e @ Error::Parse { .. }) => eprintln!("error: {}: {e}", config.model.display()),
                Failure::Core(e) => eprintln!("error: {e}"),
                Failure::Io(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(exit_code(&f))
        }
    }
}
