//! Error type shared by all modules.

use thiserror::Error;

/// Everything that can go wrong while validating or computing.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (deviation {deviation:.3e} > tol {tol:.3e})")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },

    #[error("sigma must be strictly positive (min eigenvalue {min_eig:.3e})")]
    SigmaNotStrict { min_eig: f64 },

    #[error("density matrix invalid: {context}")]
    InvalidDensity { context: String },

    #[error("GKS coefficient matrix is not PSD (min eigenvalue {min_eig:.3e})")]
    CoeffNotPsd { min_eig: f64 },

    #[error("generator does not satisfy sigma-detailed balance (residual {residual:.3e})")]
    NotDetailedBalanced { residual: f64 },

    #[error("fixed-point space of L differs from the joint commutant (dim ker L = {kernel_dim}, dim commutant = {commutant_dim})")]
    FixedPointsNotAlgebra {
        kernel_dim: usize,
        commutant_dim: usize,
    },

    #[error("jump spans are not nested: {context}")]
    SpanNotIncluded { context: String },

    #[error("span and PSD-bisection routes disagree: {span_c} vs {bisect_c}")]
    MethodsDisagree { span_c: f64, bisect_c: f64 },

    #[error("block structure inconsistent: {context}")]
    BadBlockStructure { context: String },

    #[error("construction failed verification: {context} (residual {residual:.3e})")]
    VerificationFailed { context: String, residual: f64 },

    #[error("matrix is not the gradient matrix of any *-preserving map annihilating I (residual {residual:.3e})")]
    NotGammaShaped { residual: f64 },

    #[error("element lies outside the span measurable by the order unit (kernel leak {leak:.3e})")]
    OutsideSpan { leak: f64 },

    #[error("support of rho is not contained in the support of sigma")]
    SupportViolation,

    #[error("rho must be strictly positive here (min eigenvalue {min_eig:.3e})")]
    RhoNotStrict { min_eig: f64 },

    #[error("generators have different fixed-point algebras ({left_dim} vs {right_dim} dimensional)")]
    FixedAlgebraMismatch { left_dim: usize, right_dim: usize },

    #[error("emission rate below tolerance ({rate:.3e}); g2(0) undefined")]
    ZeroEmission { rate: f64 },

    #[error("state too close to its conditional expectation; ratio undefined (divergence {divergence:.3e})")]
    DegenerateState { divergence: f64 },

    #[error("degenerate random probe persisted after {attempts} resamples")]
    ProbeDegenerate { attempts: usize },

    #[error("invalid input: {context}")]
    InvalidInput { context: String },
}

impl Error {
    pub(crate) fn dim(context: impl Into<String>) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
        }
    }

    pub(crate) fn input(context: impl Into<String>) -> Self {
        Error::InvalidInput {
            context: context.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
