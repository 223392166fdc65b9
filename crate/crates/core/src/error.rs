use num_complex::Complex64;
use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain of an operation (non-finite argument,
    /// non-positive width, momentum outside a table, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// An adaptive quadrature ran out of its subdivision budget. The best
    /// estimate obtained so far is carried along for diagnostics.
    #[error("quadrature did not converge (best estimate {best}, est_error {est_error:.3e})")]
    Convergence { best: Complex64, est_error: f64 },

    /// Richardson extrapolation residuals stopped decreasing.
    #[error("regulator extrapolation diverging: {0}")]
    ExtrapolationDiverging(String),

    /// A constructed state failed one of its normalization invariants.
    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("{0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
