use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An input lies outside the domain on which the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A curve, mesh or basis is degenerate (repeated samples, zero-area triangles, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A parameter is outside its documented range.
    #[error("parameter out of range: {0}")]
    Parameter(String),

    /// An iterative method stopped without meeting its tolerance.
    #[error("no convergence after {iterations} iterations: {message}")]
    NoConvergence {
        iterations: usize,
        message: String,
        /// Objective or residual history, one entry per outer iteration.
        trace: Vec<f64>,
    },

    /// A least-squares design matrix is too ill-conditioned to trust.
    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
