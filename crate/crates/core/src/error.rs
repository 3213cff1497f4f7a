use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Parse,
    Validation,
    Unsupported,
    Numeric,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("model is unstable: stability margins ({0:.6e}, {1:.6e}) must both be negative")]
    Unstable(f64, f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported regime: {0}")]
    Unsupported(String),

    #[error("{context}: {msg}")]
    Numeric { context: String, msg: String },

    #[error("{context}: rank-deficient system (rank {rank} of {cols}, residual {residual:.3e})")]
    RankDeficient {
        context: String,
        rank: usize,
        cols: usize,
        residual: f64,
    },

    #[error("{context}: ill-conditioned system (condition number {cond:.3e})")]
    IllConditioned { context: String, cond: f64 },

    #[error("{context}: found {found} roots inside the unit disk, need {needed}")]
    InsufficientRoots {
        context: String,
        found: usize,
        needed: usize,
    },

    #[error("eigenvalue branches {j} and {next} come within {gap:.3e} at beta={beta}, alpha={alpha}")]
    BranchCrossing {
        j: usize,
        next: usize,
        gap: f64,
        beta: f64,
        alpha: f64,
    },

    #[error("no convergence after {iterations} sweeps (last change {change:.3e})")]
    NoConvergence { iterations: usize, change: f64 },

    #[error("boundary supremum unavailable: {0}")]
    BoundUnavailable(String),
}

impl Error {
    pub fn numeric(context: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Numeric {
            context: context.into(),
            msg: msg.into(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse { .. } => ErrorClass::Parse,
            Error::InvalidModel(_) | Error::Unstable(..) => ErrorClass::Validation,
            Error::Unsupported(_) => ErrorClass::Unsupported,
            _ => ErrorClass::Numeric,
        }
    }
}
