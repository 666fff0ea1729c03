//! Shared error type for every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes exposed by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Gamma evaluated at a pole (zero or a negative integer).
    #[error("gamma pole at x = {0}")]
    GammaPole(f64),

    /// A scalar result exceeds the representable double range.
    #[error("overflow evaluating {context} at x = {x}")]
    Overflow { context: &'static str, x: f64 },

    /// Argument outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Fractional order outside the admissible interval.
    #[error("fractional order alpha = {alpha} outside {interval}")]
    InvalidOrder { alpha: f64, interval: &'static str },

    /// Scheme order not one of {2, 4, 6, 8, 10}.
    #[error("unsupported scheme order {0} (supported: 2, 4, 6, 8, 10)")]
    UnsupportedScheme(usize),

    /// Vector/matrix dimensions disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Matrix is singular within the pivot tolerance.
    #[error("singular matrix: pivot {pivot:.3e} below tolerance {tol:.3e} at step {step}")]
    Singular { pivot: f64, tol: f64, step: usize },

    /// Matrix fails the symmetry precondition.
    #[error("matrix not symmetric: max asymmetry {max_asym:.3e} exceeds {tol:.3e}")]
    Asymmetric { max_asym: f64, tol: f64 },

    /// Grid function has nonzero boundary values where zeros are required.
    #[error("nonzero boundary value {value:.3e} (tolerance {tol:.3e})")]
    NonzeroBoundary { value: f64, tol: f64 },

    /// Grid too small for the requested stencil.
    #[error("grid too small: need M - 1 > {needed}, have M - 1 = {have}")]
    GridTooSmall { needed: usize, have: usize },

    /// Invalid grid parameters.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// I/O failure while emitting results.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Malformed CSV input.
    #[error("csv parse error: {0}")]
    CsvParse(String),
}
