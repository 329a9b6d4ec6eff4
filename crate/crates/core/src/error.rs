use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the selection and evaluation stack.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input data is malformed: shape mismatches, non-finite cells, missing columns.
    #[error("data error: {0}")]
    Data(String),

    /// A dataset file failed to parse.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// The configuration file or an override is invalid.
    #[error("config error: {0}")]
    Config(String),

    /// A kernel with zero Frobenius norm was passed where a cosine is required.
    #[error("degenerate kernel: zero Frobenius norm")]
    DegenerateKernel,

    /// Labels contain a single class.
    #[error("degenerate target: labels contain a single class")]
    DegenerateTarget,

    /// Every latent point coincides, so the median distance is zero.
    #[error("degenerate latent space: all latent points coincide")]
    DegenerateLatent,

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("undefined correlation: column {column} has zero variance")]
    UndefinedCorrelation { column: String },

    #[error("solver did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for the command-line front end.
    ///
    /// `1` for data problems, `2` for configuration problems, `3` for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Data(_) | Error::Parse { .. } | Error::Io { .. } => 1,
            Error::Parameter(_) | Error::Config(_) => 2,
            Error::DegenerateKernel
            | Error::DegenerateTarget
            | Error::DegenerateLatent
            | Error::UndefinedMetric(_)
            | Error::UndefinedCorrelation { .. }
            | Error::NonConvergence { .. } => 3,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
