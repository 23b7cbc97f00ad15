use thiserror::Error;

/// Errors raised while building, coupling or simulating Lévy triplets.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Rejected input, tagged with the offending field (`jumps[2].w`, `diffusion`, ...).
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("symmetric eigensolver did not converge for a {0}x{0} matrix")]
    Eigensolver(usize),

    #[error("transport solver failed: {0}")]
    Solver(String),

    #[error("dual potentials violate the cost constraint: {0}")]
    InfeasibleDuals(String),

    #[error("unbalanced masses for classical transport: {0} vs {1}")]
    Unbalanced(f64, f64),

    #[error("unknown coupling strategy `{0}`")]
    UnknownStrategy(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical machinery itself rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::Eigensolver(_) | Error::Solver(_) | Error::InfeasibleDuals(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
