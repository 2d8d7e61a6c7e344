//! Column-oriented tools for tall n×p blocks stored as lists of columns:
//! one-sided Jacobi SVD, Gram–Schmidt and principal angles.

use num_traits::Zero;

use super::matrix::{vec_dot, vec_norm, ComplexMatrix};
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

const MAX_SWEEPS: usize = 60;

/// Thin SVD A = U Σ V† of a tall block given by columns.
#[derive(Clone, Debug)]
pub struct ThinSvd<T: Real> {
    /// Ascending.
    pub singular_values: Vec<T>,
    /// Left singular vectors, one per singular value (zero vector if σ = 0).
    pub left: Vec<Vec<C<T>>>,
    /// Right singular vectors as columns of a p×p unitary.
    pub right: ComplexMatrix<T>,
}

/// One-sided (Hestenes) Jacobi SVD; accurate for small singular values,
/// unlike the eigenvalues of A†A.
pub fn thin_svd<T: Real>(columns: &[Vec<C<T>>]) -> Result<ThinSvd<T>> {
    let p = columns.len();
    let mut a: Vec<Vec<C<T>>> = columns.to_vec();
    let mut v = ComplexMatrix::<T>::identity(p);
    let eps = T::epsilon() * T::lit(4.0);
    let mut converged = p <= 1;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for i in 0..p.saturating_sub(1) {
            for j in i + 1..p {
                let alpha = vec_dot(&a[i], &a[i]).re;
                let beta = vec_dot(&a[j], &a[j]).re;
                let gamma = vec_dot(&a[i], &a[j]);
                let g = gamma.norm();
                if g == T::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let theta = (beta - alpha) / (T::lit(2.0) * g);
                let t = if theta == T::zero() {
                    T::one()
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                let vji = -phase.conj() * s;
                let vjj = phase.conj() * c;
                let (lo, hi) = a.split_at_mut(j);
                for (x, y) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
                    let (xi, yj) = (*x, *y);
                    *x = xi * c + yj * vji;
                    *y = xi * s + yj * vjj;
                }
                for r in 0..p {
                    let (vri, vrj) = (v[(r, i)], v[(r, j)]);
                    v[(r, i)] = vri * c + vrj * vji;
                    v[(r, j)] = vri * s + vrj * vjj;
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "one-sided Jacobi SVD",
            iterations: MAX_SWEEPS,
            residual: f64::NAN,
        });
    }
    let norms: Vec<T> = a.iter().map(|c| vec_norm(c)).collect();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| norms[i].partial_cmp(&norms[j]).expect("finite"));
    let singular_values = order.iter().map(|&i| norms[i]).collect();
    let left = order
        .iter()
        .map(|&i| {
            let n = norms[i];
            if n > T::zero() {
                a[i].iter().map(|&z| z / n).collect()
            } else {
                vec![C::zero(); a[i].len()]
            }
        })
        .collect();
    let right = ComplexMatrix::from_fn(p, |r, c| v[(r, order[c])]);
    Ok(ThinSvd {
        singular_values,
        left,
        right,
    })
}

/// Modified Gram–Schmidt with one re-orthogonalization pass. Columns whose
/// residual norm drops below `drop_tol` times their original norm are skipped.
pub fn orthonormalize<T: Real>(columns: &[Vec<C<T>>], drop_tol: T) -> Vec<Vec<C<T>>> {
    let mut basis: Vec<Vec<C<T>>> = Vec::with_capacity(columns.len());
    for col in columns {
        let norm0 = vec_norm(col);
        if norm0 == T::zero() {
            continue;
        }
        let mut w = col.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj = vec_dot(b, &w);
                for (x, &y) in w.iter_mut().zip(b) {
                    *x -= proj * y;
                }
            }
        }
        let n = vec_norm(&w);
        if n <= drop_tol * norm0 {
            continue;
        }
        basis.push(w.into_iter().map(|z| z / n).collect());
    }
    basis
}

/// Sine of the largest principal angle between span(a) and span(b); both
/// arguments must be orthonormal column sets of the same ambient dimension.
pub fn max_principal_sine<T: Real>(a: &[Vec<C<T>>], b: &[Vec<C<T>>]) -> Result<T> {
    if a.is_empty() {
        return Ok(T::zero());
    }
    let residuals: Vec<Vec<C<T>>> = a
        .iter()
        .map(|x| {
            let mut r = x.clone();
            for q in b {
                let proj = vec_dot(q, x);
                for (ri, &qi) in r.iter_mut().zip(q) {
                    *ri -= proj * qi;
                }
            }
            r
        })
        .collect();
    let svd = thin_svd(&residuals)?;
    let worst = svd.singular_values.last().copied().unwrap_or_else(T::zero);
    let sine = if a.len() > b.len() { T::one() } else { worst };
    Ok(sine.min(T::one()))
}
