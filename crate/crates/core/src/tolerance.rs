//! Numerical tolerances shared by the library and its tests.
//!
//! All matrices handled here have entries of order one, so every tolerance
//! is an absolute, dimensionless bound on a max-abs entrywise difference.

/// Hermiticity check: `max |M - M†| < TOL_HERMITIAN`.
pub const TOL_HERMITIAN: f64 = 1e-10;

/// Positive semidefiniteness: smallest eigenvalue `>= -TOL_PSD`.
pub const TOL_PSD: f64 = 1e-9;

/// General algebraic identity tolerance.
pub const TOL_IDENTITY: f64 = 1e-10;

/// Density-matrix trace tolerance.
pub const TOL_TRACE: f64 = 1e-10;

/// Default verification tolerance for analytically known SIC sets.
pub const TOL_VERIFY_ANALYTIC: f64 = 1e-10;

/// Default verification tolerance for optimizer output.
pub const TOL_VERIFY_NUMERIC: f64 = 1e-6;

/// Largest accepted condition number of an `𝔐(L)` / `Σ(L)` block.
pub const COND_MAX: f64 = 1e6;

/// Normalization tolerance for probability vectors.
pub const TOL_PROBABILITY_SUM: f64 = 1e-9;
