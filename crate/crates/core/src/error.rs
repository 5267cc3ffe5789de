use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("feature kind mismatch: model expects {expected}, datum is {found}")]
    KindMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("degenerate hyperparameter grid for `{0}`: every candidate has zero probability")]
    DegenerateGrid(String),

    #[error("invalid schedule at step {step}: {reason}")]
    Schedule { step: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
