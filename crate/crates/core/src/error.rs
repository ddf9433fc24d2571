use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation (e.g. `|a| >= 1`).
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation hit a singularity (kernel pole, `G(z, a)` at `z = a`).
    #[error("pole: {0}")]
    Pole(String),

    /// A caller-side contract was violated (e.g. ray integrand not vanishing at 0).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Parameter outside the admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Rejection sampling became too inefficient to resolve the region.
    #[error("resolution error: acceptance rate {acceptance:.3e} below {threshold:.1e}")]
    Resolution { acceptance: f64, threshold: f64 },

    /// Too many integrand evaluations failed on a sample cloud.
    #[error("{excluded} of {total} sample points excluded (limit {limit_fraction})")]
    TooManyExclusions {
        excluded: usize,
        total: usize,
        limit_fraction: f64,
    },

    /// The operation is not available for this function representation.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Adaptive quadrature did not reach its tolerance.
    #[error("quadrature did not converge: estimate {estimate:.6e}, error {error:.3e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
