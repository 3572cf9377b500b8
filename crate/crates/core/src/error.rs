use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of an operation (bad counts, odd ladder sizes, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller broke an operation's precondition, e.g. a term that changes the sector.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Input parsed but failed a consistency check (symmetry, dimensions).
    #[error("validation error: {0}")]
    Validation(String),

    #[error(
        "eigensolver did not converge after {iterations} iterations (residual norms {residuals:?})"
    )]
    NoConvergence {
        iterations: usize,
        residuals: Vec<f64>,
    },

    /// The one-body problem is degenerate at the Fermi level, so no unique Slater determinant exists.
    #[error("degenerate Fermi level: {0}; use a different epsilon or spin sector")]
    DegenerateFermiLevel(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
