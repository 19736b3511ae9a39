//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature could not reach the requested tolerance.
    /// `value` and `error` carry the best partial result.
    #[error("quadrature did not converge: value {value:.6e}, error estimate {error:.6e}")]
    QuadratureNonConvergence { value: f64, error: f64 },

    /// A Fock-space truncation was too small for the requested accuracy.
    #[error("Fock truncation too small: cutoff {cutoff} gives truncation defect {defect:.3e}; suggest cutoff >= {suggested}")]
    Truncation {
        cutoff: usize,
        defect: f64,
        suggested: usize,
    },

    /// Requested Hilbert-space dimension exceeds the configured bound.
    #[error("Hilbert space dimension {requested} exceeds bound {bound}")]
    DimensionTooLarge { requested: usize, bound: usize },

    /// A zero crossing of the decoherence rate could not be resolved.
    #[error("unresolved rate zero crossing near t = {t:.6e}: {detail}")]
    UnresolvedRoot { t: f64, detail: String },

    /// Invalid run configuration (bad flag value, missing key, ...).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// I/O failure while reading config or writing results.
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
