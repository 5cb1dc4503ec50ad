use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed or out-of-domain input values.
    #[error("invalid input: {0}")]
    Input(String),

    /// The requested quantity is undefined at these parameters.
    #[error("domain error: {0}")]
    Domain(String),

    /// The two couplings sit on opposite sides of the critical point.
    #[error("couplings {first} and {second} lie in different phases (critical point {critical})")]
    CrossPhase {
        first: f64,
        second: f64,
        critical: f64,
    },

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A problem size exceeded a configured cap.
    #[error("resource limit: {0}")]
    Resource(String),

    #[error("fit did not converge: {message} (residual trace: {residuals:?})")]
    Fit {
        message: String,
        residuals: Vec<f64>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Input(format!("{name} must be finite, got {value}")))
    }
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    ensure_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::Input(format!(
            "{name} must be positive, got {value}"
        )))
    }
}
