use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Spectral data violating ordering or positivity.
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    /// An iterative or quadrature method did not converge.
    #[error("numerical error: {what} (achieved estimate {estimate:e})")]
    Numerical { what: String, estimate: f64 },

    /// Two independent computations of the same quantity disagree.
    #[error("consistency check `{check}` failed: residual {residual:e} exceeds {tolerance:e}")]
    Consistency {
        check: String,
        residual: f64,
        tolerance: f64,
    },

    /// Evaluation at a pole or branch point.
    #[error("singular point: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn consistency(check: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Error::Consistency {
            check: check.into(),
            residual,
            tolerance,
        }
    }
}

/// Fails with [`Error::Consistency`] when `residual` is not within `tolerance`.
pub(crate) fn ensure(check: &str, residual: f64, tolerance: f64) -> Result<()> {
    if residual.is_finite() && residual <= tolerance {
        Ok(())
    } else {
        Err(Error::consistency(check, residual, tolerance))
    }
}
