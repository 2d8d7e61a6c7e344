use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("matrix is not positive definite (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("linear system is singular")]
    Singular,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("superoperator of dimension {dim}² exceeds the {limit} element guard")]
    DimensionTooLarge { dim: usize, limit: usize },

    #[error("coherent tail too heavy: |β|²+10|β| = {required:.2} exceeds dim = {dim}")]
    TailTooHeavy { required: f64, dim: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step size underflow at t = {t:.6e} (dt = {dt:.3e})")]
    StepUnderflow { t: f64, dt: f64 },

    #[error("positivity lost at t = {t:.6e} (min eigenvalue {min_eig:.3e})")]
    PositivityLost { t: f64, min_eig: f64 },

    #[error(
        "near-null space has dimension {found}, expected {expected} \
         (smallest singular values {singular_values:?}, gap ratio {gap:.3e})"
    )]
    RankMismatch {
        found: usize,
        expected: usize,
        gap: f64,
        singular_values: Vec<f64>,
    },

    #[error("invariant/steady-state pairing is ill-conditioned (condition number {cond:.3e})")]
    IllConditionedPairing { cond: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
