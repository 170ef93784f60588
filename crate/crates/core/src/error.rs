use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("coordinate {index} out of range for dimension {dim}")]
    OutOfRange { index: usize, dim: usize },

    #[error("similarity is undefined for two empty sets")]
    UndefinedSimilarity,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{what} = {value} is not divisible by {divisor}")]
    Divisibility {
        what: &'static str,
        value: usize,
        divisor: usize,
    },

    #[error("{what}: construction failed after {attempts} attempts")]
    Construction { what: String, attempts: usize },

    #[error("cost guard exceeded: {0}")]
    CostGuard(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("index container: {0}")]
    Format(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Dimension { .. }
            | Error::OutOfRange { .. }
            | Error::UndefinedSimilarity
            | Error::Parameter(_)
            | Error::Divisibility { .. }
            | Error::Parse { .. } => 2,
            Error::Construction { .. } | Error::CostGuard(_) => 3,
            Error::Verification(_) => 4,
            Error::Format(_) | Error::Io(_) => 1,
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
