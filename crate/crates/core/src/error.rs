use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the operation's domain (dimension mismatch, bad index, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// The weight construction cannot be applied to this graph.
    #[error("construction unsupported: {0}")]
    ConstructionUnsupported(String),

    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    /// The span is deficient but no admissible perturbation row exists.
    #[error("certificate not constructible: {0}")]
    CertificateNotConstructible(String),

    #[error("subgradients unbounded: {0}")]
    UnboundedSubgradient(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Observed data matrix is rank deficient relative to the tolerance.
    #[error("singular data: conditioning {conditioning:e} below tolerance {tolerance:e}")]
    SingularData { conditioning: f64, tolerance: f64 },

    #[error("boundedness estimate inapplicable: max row sum of A is {0} (must be < 1)")]
    BoundInapplicable(f64),

    #[error("configuration error: {0}")]
    Configuration(String),

    /// Some agent does not update a constant positive number of times per window.
    #[error("update-count condition violated: {0}")]
    Assumption4(String),

    #[error("reference error: {0}")]
    Reference(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }
}
