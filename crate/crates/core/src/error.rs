use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A caller supplied inputs that violate an operation's preconditions.
    #[error("usage error: {0}")]
    Usage(String),

    /// A numeric parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("minimizer undefined: objective has zero total weight")]
    UndefinedMinimizer,

    /// A runtime guarantee failed; indicates a bug or an invalid schedule.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
