use std::path::{Path, PathBuf};

/// Crate-wide error type. Variants group into the three failure families the
/// CLI maps to exit codes: usage/config (1), numeric (2), I/O or data (3).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid distribution: {0}")]
    Dist(String),
    #[error("infeasible problem: {0}")]
    Infeasible(String),
    #[error("no convergence after {iters} iterations (residual {residual:e})")]
    NonConvergence { iters: usize, residual: f64 },
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("diverged at step {step}: {what}")]
    Diverged { step: usize, what: String },
    #[error("{path}: malformed input at line {line}: {msg}")]
    Malformed {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("unknown category {value:?} in column {column:?}")]
    UnknownCategory { column: String, value: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Exit code for the CLI: 1 usage/config, 2 numeric, 3 I/O or data format.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Shape(_) | Error::Config(_) | Error::Dist(_) => 1,
            Error::Infeasible(_)
            | Error::NonConvergence { .. }
            | Error::NonFinite(_)
            | Error::Diverged { .. } => 2,
            Error::Malformed { .. }
            | Error::UnknownCategory { .. }
            | Error::Checkpoint(_)
            | Error::Io { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
