use crate::schemes::SchemeId;

/// Errors returned by the simulator and the analytical engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A caller broke an operation's precondition (wrong lengths, wrong
    /// scheme, out-of-range delay...).
    #[error("contract violation: {0}")]
    Contract(String),
    /// An argument lies outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A parameter set failed validation.
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    /// Adaptive quadrature did not reach the requested tolerance.
    #[error(
        "quadrature did not converge on [{lower}, {upper}]: estimate {estimate:e}, \
         error {error:e}, {intervals} intervals"
    )]
    Quadrature {
        lower: f64,
        upper: f64,
        estimate: f64,
        error: f64,
        intervals: usize,
    },
    /// The operation is not defined for the given scheme.
    #[error("operation not supported for scheme {0}")]
    UnsupportedScheme(SchemeId),
}

pub type Result<T> = std::result::Result<T, Error>;
