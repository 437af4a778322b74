use thiserror::Error;

/// Errors raised by the analytical and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("integration did not converge (estimate {estimate:e}, error estimate {error:e}, {evaluations} evaluations)")]
    NoConvergence {
        estimate: f64,
        error: f64,
        evaluations: usize,
    },

    #[error("root not bracketed on [{lo:e}, {hi:e}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("degenerate moments: {0}")]
    DegenerateMoments(String),

    #[error("characteristic-function inversion stopped at t = {t_max}: partial value {partial}, residual bound {residual:e}")]
    InversionTruncated {
        partial: f64,
        residual: f64,
        t_max: f64,
    },

    #[error("simulation: {0}")]
    Simulation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
