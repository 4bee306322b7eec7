use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or unknown configuration entry. `key` names the offending field.
    #[error("config error in `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// A closed-form quantity has a zero (or otherwise undefined) denominator.
    #[error("{quantity} is undefined: {reason}")]
    Undefined { quantity: &'static str, reason: String },

    #[error("degenerate steady manifold: Liouvillian null space has dimension {dimension}")]
    DegenerateSteadyState { dimension: usize },

    #[error("integrator step size underflow at t = {time:e} (step {step:e})")]
    StepUnderflow { time: f64, step: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("horizon too short: {dropped} of {total} trajectories never met the wait condition")]
    HorizonTooShort { dropped: usize, total: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the command-line front end.
    ///
    /// 1: configuration, 2: numerical failure, 3: insufficient statistics.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::InvalidParameter { .. } => 1,
            Error::InsufficientData(_) | Error::HorizonTooShort { .. } => 3,
            _ => 2,
        }
    }
}
