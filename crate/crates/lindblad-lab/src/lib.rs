//! Numerics for finite-dimensional Lindblad generators: gradient forms and
//! their comparison, detailed balance, conditional-expectation generators,
//! order-unit norms, spectral gaps, entropy production and the photon
//! correlation g²(0).
//!
//! All operators live on M_n(ℂ) as dense complex matrices. Two trace
//! conventions appear side by side and every function documents which one it
//! uses: `Tr` is the plain matrix trace, `τ = Tr/n` the normalized trace.
//! Superoperators are stored as n²×n² matrices acting on row-major
//! vectorizations (see [`mat::Superop`]).

pub mod condexp;
pub mod error;
pub mod generator;
pub mod gradient;
pub mod ineq;
pub mod json;
pub mod mat;
pub mod optics;
pub mod oracle;
pub mod order;
pub mod tol;

pub use error::{Error, Result};
pub use mat::{CMat, C64};
