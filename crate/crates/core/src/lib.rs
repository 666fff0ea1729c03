//! High-order fractional-compact differentiation formulas for Riesz
//! derivatives and a fourth-order (in time and space) finite difference
//! solver for the Riesz spatial telegraph equation.
//!
//! The crate is organized as a stack of small modules:
//!
//! - [`specfun`] — embedded Lanczos gamma/log-gamma with fixed coefficients,
//!   so coefficient tables are bit-stable across platforms.
//! - [`coeffs`] — the fractional centred-difference weights `g_k`, the
//!   compact-correction weights `b_ℓ`, the generating-series coefficients
//!   `a_p`, and the analytic bound functions used by the property suite.
//! - [`linalg`] — symmetric Toeplitz application, banded and dense LU,
//!   Cholesky positive-definiteness certificates, Gershgorin intervals.
//! - [`riesz_ops`] — grid-level Riesz-derivative machinery: the truncated
//!   centred difference, the matrices `A_α`/`D_α`, the compact formulas of
//!   orders 2..10, and exact Riesz derivatives of `x^m (1-x)^m`.
//! - [`telegraph`] — the three-level compact scheme for
//!   `u_tt + ν u_t = κ² ∂^α u/∂|x|^α + f`, including the first-level
//!   bootstrap and the stability check.
//! - [`harness`] — convergence sweeps, the property suite, and CSV/JSON
//!   emitters backing the CLI.

pub mod coeffs;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod riesz_ops;
pub mod specfun;
pub mod telegraph;

pub use error::{Error, Result};
