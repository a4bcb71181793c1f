use thiserror::Error;

/// Errors raised by the numerical kernels and model constructors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),

    #[error("dimension {requested} exceeds the configured Hilbert-space cap of {cap}")]
    DimensionLimit { requested: usize, cap: usize },

    #[error(
        "memory budget exceeded: dimension {dim} needs {bytes} bytes for a dense complex matrix \
         (budget {budget} bytes)"
    )]
    MemoryBudget { dim: usize, bytes: u128, budget: u128 },

    #[error("eigensolver did not converge for a {dim}x{dim} matrix")]
    NoConvergence { dim: usize },

    #[error("matrix is not Hermitian: max |A - A^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("numerical stability violated: {0}")]
    Stability(String),

    #[error("liouvillian decomposition failed: {0}")]
    Decomposition(String),

    #[error("no steady state: |lambda_1| = {magnitude:e} exceeds tolerance {tol:e}")]
    NoSteadyState { magnitude: f64, tol: f64 },

    #[error("steady state is not unique: {count} eigenvalues within tolerance of zero")]
    DegenerateSteadyState { count: usize },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("quadrature failed to converge at t = {t}: refinement disagreement {disagreement:e}")]
    Quadrature { t: f64, disagreement: f64 },

    #[error("model error: {0}")]
    Model(String),
}

pub type Result<T> = std::result::Result<T, Error>;
