use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("parity error: {0}")]
    Parity(String),
    #[error("imbalance undefined: p_odd + p_even = {0:e}")]
    UndefinedImbalance(f64),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("unphysical result: {0}")]
    Physicality(String),
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that signal a failed numerical accuracy guarantee.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Accuracy(_) | Error::Physicality(_) | Error::DegenerateFit(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
