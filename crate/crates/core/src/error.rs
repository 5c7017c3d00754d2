use thiserror::Error;

/// Errors raised by the key-rate engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("matrix is not Hermitian: |a[{row}][{col}] - conj(a[{col}][{row}])| = {deviation:e}")]
    NotHermitian { row: usize, col: usize, deviation: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("not a density spectrum: {0}")]
    NotDensitySpectrum(String),

    #[error("non-finite value in quadrature at x = {at}")]
    NonFinite { at: f64 },

    #[error("all likelihoods vanish at outcome {0}")]
    DeadOutcome(String),

    #[error("Eve coefficient construction failed: {0}")]
    Construction(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
