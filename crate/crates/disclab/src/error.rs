use thiserror::Error;

/// Error type shared by all modules.
#[derive(Debug, Error)]
pub enum DiscLabError {
    /// Invalid body description or run configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// The requested operation is not defined for this body
    /// (e.g. a smoothness-only bound applied to the double cone).
    #[error("unsupported: {0}")]
    UnsupportedBody(String),

    /// The (body, direction) pair has no closed form or special route.
    #[error("unsupported query: {0}")]
    UnsupportedQuery(String),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A quadrature failed to converge within its refinement budget.
    /// Carries the last two refinement iterates for diagnosis.
    #[error("accuracy error in {context}: last iterates {prev} and {last}")]
    Accuracy {
        context: String,
        prev: f64,
        last: f64,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, DiscLabError>;
