use thiserror::Error;

/// Errors shared by all modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not invertible")]
    NotInvertible,

    #[error("not regular: eigenvalue gap {gap:.3e} below tolerance {tol:.3e}")]
    NotRegular { gap: f64, tol: f64 },

    #[error("singular principal minor: pivot {index} has magnitude {magnitude:.3e}")]
    SingularMinor { index: usize, magnitude: f64 },

    #[error("diagonal entry {index} lies on the negative real axis; principal square root undefined")]
    BranchCut { index: usize },

    #[error("matrix exponential overflowed")]
    Overflow,

    #[error("function is not invariant: deviation {0:.3e}")]
    InvarianceViolated(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
