use thiserror::Error;

/// Errors raised by the evaluators, identity checks and the sampling layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty domain: {0}")]
    EmptyDomain(String),

    #[error("invalid modulus {0}: modulus must be a positive integer")]
    InvalidModulus(i64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singularity: {what} lies within {radius:e} of the singular point {point}")]
    Singularity {
        what: String,
        point: f64,
        radius: f64,
    },

    #[error("precision error: {what} has tail bound {bound:e} above tolerance {tol:e}")]
    Precision { what: String, bound: f64, tol: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("degenerate correlation: zero denominator for {0}")]
    Degenerate(String),

    #[error("insufficient data: need at least 2 samples, got {0}")]
    InsufficientData(usize),

    #[error("table cell (alpha={alpha}, beta={beta}) failed: {source}")]
    Table {
        alpha: String,
        beta: String,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
