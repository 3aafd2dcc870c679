use thiserror::Error;

/// Errors surfaced by the evaluation, quadrature and catalogue layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Gamma evaluated at a non-positive integer.
    #[error("gamma pole at x = {0}")]
    Pole(f64),

    /// Input outside the admissible parameter domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An adaptive quadrature exhausted its budget without meeting the
    /// error target.
    #[error("quadrature failed to converge (error estimate {estimate:e}, target {target:e})")]
    QuadratureFailure { estimate: f64, target: f64 },

    /// A series evaluation hit its term cap without meeting the target.
    #[error("series did not converge within {terms} terms")]
    NotConverged { terms: usize },

    /// A catalogue file failed to parse.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
