//! Seeded random test inputs: Ginibre-based Hermitian, PSD and density matrices.

use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::ComplexMatrix;
use crate::scalar::{Real, C};

pub fn complex_normal<T: Real, R: Rng + ?Sized>(rng: &mut R) -> C<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re), T::lit(im))
}

pub fn ginibre<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(dim, |_, _| complex_normal(rng))
}

pub fn random_hermitian<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix<T> {
    ginibre(dim, rng).hermitian_part()
}

/// G G† for a Ginibre G.
pub fn random_psd<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix<T> {
    let g = ginibre::<T, R>(dim, rng);
    g.matmul(&g.adjoint()).hermitian_part()
}

/// Unit-trace PSD matrix of size `dim` whose support is the first `support`
/// Fock levels.
pub fn random_density_matrix<T: Real, R: Rng + ?Sized>(
    dim: usize,
    support: usize,
    rng: &mut R,
) -> ComplexMatrix<T> {
    let support = support.clamp(1, dim);
    let block = random_psd::<T, R>(support, rng);
    let tr = block.trace().re;
    block.scale_real(T::one() / tr).embed(dim)
}

/// Unit vector supported on the first `support` entries.
pub fn random_unit_vector<T: Real, R: Rng + ?Sized>(
    dim: usize,
    support: usize,
    rng: &mut R,
) -> Vec<C<T>> {
    let support = support.clamp(1, dim);
    let mut v: Vec<C<T>> = (0..dim)
        .map(|i| {
            if i < support {
                complex_normal(rng)
            } else {
                C::new(T::zero(), T::zero())
            }
        })
        .collect();
    let n = super::matrix::vec_norm(&v);
    for z in &mut v {
        *z = *z / n;
    }
    v
}
