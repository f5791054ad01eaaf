use thiserror::Error;

use crate::bubble::FitResult;
use crate::series::MonthStamp;

/// Errors produced by the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input at line {line}, column {column}: {message}")]
    MalformedInput { line: u64, column: usize, message: String },

    #[error("region {region}: missing month {month}")]
    Gap { region: String, month: MonthStamp },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("model is singular at t = {t}")]
    Singularity { t: f64 },

    #[error("no start converged for {kind} (best rms {rms:.6e})", kind = .best.kind, rms = .best.rms)]
    NoConvergence { best: Box<FitResult> },

    #[error("no crossover time found: {0}")]
    NoCrossover(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),

    #[error("unknown region {0:?}")]
    UnknownRegion(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// `true` when the error stems from the caller's data or arguments rather
    /// than from a failure of the library itself.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::NoConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
