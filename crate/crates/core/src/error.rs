use thiserror::Error;

/// Errors raised by the simulation kernels and experiment drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter or input violates its documented range.
    #[error("invalid {field}: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// An input is structurally inconsistent (unsorted points, incomplete spectrum, ...).
    #[error("validation failed: {0}")]
    Validation(String),

    /// The experiment cannot run for the given physical parameters.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// No chemical potential below the ground state reproduces the requested density.
    #[error("density {rho} unreachable below the ground state energy {e1}")]
    Infeasible { rho: f64, e1: f64 },

    /// Adaptive quadrature ran out of subdivisions before meeting its tolerance.
    #[error("quadrature did not converge: partial result {partial} with error estimate {error_estimate}")]
    Quadrature { partial: f64, error_estimate: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
