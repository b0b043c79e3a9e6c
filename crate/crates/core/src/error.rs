use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported phase family: {0}")]
    UnsupportedFamily(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not reach the target accuracy (achieved {achieved:.3e})")]
    Accuracy { achieved: f64 },

    #[error("function carries no asymptotic expansion at 0")]
    NeedsExpansion,

    #[error("expansion does not fit the exponent lattice: {0}")]
    LatticeMismatch(String),

    #[error("design matrix is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("region combination is empty")]
    EmptyRegion,

    #[error("boundary of the region is not concentrated at the origin")]
    BoundaryNotAtOrigin,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }
}
