//! Dense complex linear algebra: Hermitian eigendecomposition, spectral
//! functions of Hermitian matrices, LU, thin SVD and the Sylvester solver.

mod eig;
mod lu;
mod matrix;
pub mod random;
mod svd;

pub use eig::{
    abs_hermitian, hermitian_eig, min_eigenvalue, psd_sqrt, split_pos_neg, sylvester_solve,
    trace_norm, EigDecomposition, SylvesterSolver,
};
pub use lu::LuDecomposition;
pub use matrix::{vec_dot, vec_norm, ComplexMatrix};
pub use svd::{max_principal_sine, orthonormalize, thin_svd, ThinSvd};

use crate::error::Result;
use crate::scalar::Real;

/// ½‖A − B‖₁ for Hermitian A, B.
pub fn trace_distance<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<T> {
    Ok(trace_norm(&(a - b))? * T::lit(0.5))
}
