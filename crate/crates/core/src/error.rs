use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// `f(xi_p)` is too small for the Bahadur linearization to be defined.
    #[error("degenerate density: f(xi_p) = {density:e} is not above the 1e-12 floor")]
    DegenerateDensity { density: f64 },

    /// The circulant embedding had negative eigenvalues and the dense fallback is over its cap.
    #[error(
        "circulant embedding failed for n = {n} (min eigenvalue {min_eigenvalue:e}) and dense fallback is capped at n <= {cap}"
    )]
    Embedding {
        n: usize,
        cap: usize,
        min_eigenvalue: f64,
    },

    #[error("dense covariance factorization failed for n = {n}")]
    Factorization { n: usize },

    #[error("configuration error: {0}")]
    Config(String),

    /// A theorem's hypothesis on the decay exponent is not met.
    #[error("threshold violation: {0}")]
    Threshold(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("marginal metadata unavailable: {0}")]
    MissingMarginal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
