//! Numerical tolerances used across the crate.
//!
//! Defaults are relative tolerances; every PSD / Hermiticity test scales them
//! by the magnitude of the matrix under test.

/// Hermiticity test: max |M - M†| ≤ HERMITIAN * (1 + max|M|).
pub const HERMITIAN: f64 = 1e-9;

/// PSD test: min eigenvalue ≥ -PSD * (1 + max |eigenvalue|).
pub const PSD: f64 = 1e-9;

/// Trace-one check for density matrices.
pub const TRACE: f64 = 1e-9;

/// Rank decisions: singular values below RANK * (largest singular value)
/// count as zero.
pub const RANK: f64 = 1e-10;

/// Relative least-squares residual accepted by span-inclusion tests.
pub const SPAN: f64 = 1e-8;

/// Two log-mean arguments closer than LOG_MEAN_COINCIDENT * max are treated
/// as coincident; the analytic limit is used instead of the unstable quotient.
pub const LOG_MEAN_COINCIDENT: f64 = 1e-12;

/// Eigenvalue-gap threshold when grouping spectra (block recovery, modular
/// frequency classes).
pub const EIGENVALUE_GAP: f64 = 1e-7;

/// Residual allowed when verifying constructed superoperator identities.
pub const SUPEROP_IDENTITY: f64 = 1e-9;

/// Emission rates below this make g2(0) undefined.
pub const G2_DENOMINATOR: f64 = 1e-12;

/// Agreement required between independent computation routes (span vs
/// bisection, gradient vs Choi).
pub const ROUTE_AGREEMENT: f64 = 1e-6;

/// Maximum resampling attempts for random probes in block recovery.
pub const PROBE_ATTEMPTS: usize = 16;
