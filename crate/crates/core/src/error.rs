use thiserror::Error;

/// Errors raised by the pricing library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SwiftError {
    #[error("sequence length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("sinc error bound diverges: J = {j} must exceed {limit:.6}")]
    BoundDiverges { j: usize, limit: f64 },

    #[error("scale selection hit m = {m} with eps_m = {eps_m:e} above tolerance {tolerance:e}")]
    ScaleNotFound { m: u32, eps_m: f64, tolerance: f64 },

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    QuadratureNotConverged { achieved: f64, requested: f64 },

    #[error("input must not be empty")]
    EmptyInput,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

pub type Result<T> = std::result::Result<T, SwiftError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> SwiftError {
    SwiftError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
