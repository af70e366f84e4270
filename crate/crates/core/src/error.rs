//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error in {context}: {message}")]
    Domain {
        context: &'static str,
        message: String,
    },

    /// A series hit its term cap before meeting the convergence rule.
    #[error(
        "series did not converge in {context}: {terms} terms, last term {last_term:e}, \
         partial sum {partial_sum:e}"
    )]
    SeriesNotConverged {
        context: &'static str,
        terms: usize,
        last_term: f64,
        partial_sum: f64,
    },

    /// Adaptive quadrature exhausted its evaluation budget.
    #[error(
        "quadrature did not converge in {context}: {evaluations} evaluations, \
         error estimate {error_estimate:e} for value {value:e}"
    )]
    QuadratureNotConverged {
        context: &'static str,
        evaluations: usize,
        value: f64,
        error_estimate: f64,
    },

    /// Slant-path geometry outside the flat-earth validity bound.
    #[error("geometry error: {0}")]
    Geometry(String),

    /// Scenario document failed validation; all offending fields listed.
    #[error("scenario validation failed:\n{}", .0.join("\n"))]
    ScenarioValidation(Vec<String>),

    /// Scenario or sweep document could not be parsed.
    #[error("parse error in {path}: {message}")]
    Parse { path: String, message: String },
}

impl Error {
    pub fn domain(context: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            context,
            message: message.into(),
        }
    }
}
