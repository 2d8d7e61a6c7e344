use num_traits::Zero;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// PA = LU with partial pivoting; L unit lower triangular, stored in place.
#[derive(Clone, Debug)]
pub struct LuDecomposition<T: Real> {
    n: usize,
    lu: Vec<C<T>>,
    perm: Vec<usize>,
    /// Number of pivots that were lifted to the regularization floor.
    pub lifted_pivots: usize,
}

impl<T: Real> LuDecomposition<T> {
    pub fn new(a: &ComplexMatrix<T>) -> Result<Self> {
        let lu = Self::factor(a, T::zero());
        if lu.lifted_pivots > 0 {
            return Err(Error::Singular);
        }
        Ok(lu)
    }

    /// Factorization for inverse iteration on (nearly) singular matrices:
    /// pivots smaller than `floor` in magnitude are replaced by `floor`.
    pub fn new_regularized(a: &ComplexMatrix<T>, floor: T) -> Self {
        Self::factor(a, floor)
    }

    fn factor(a: &ComplexMatrix<T>, floor: T) -> Self {
        let n = a.dim();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut lifted = 0;
        for k in 0..n {
            let (mut piv, mut best) = (k, T::zero());
            for i in k..n {
                let v = lu[i * n + k].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if piv != k {
                for j in 0..n {
                    lu.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
            }
            if best <= floor {
                lifted += 1;
                let phase = if best == T::zero() {
                    C::new(T::one(), T::zero())
                } else {
                    lu[k * n + k] / best
                };
                lu[k * n + k] = phase * floor.max(T::min_positive_value());
            }
            let pivot = lu[k * n + k];
            let (head, tail) = lu.split_at_mut((k + 1) * n);
            let row_k = &head[k * n + k + 1..k * n + n];
            for i in k + 1..n {
                let row_i = &mut tail[(i - k - 1) * n..(i - k) * n];
                let l = row_i[k] / pivot;
                row_i[k] = l;
                if l.is_zero() {
                    continue;
                }
                for (x, &y) in row_i[k + 1..].iter_mut().zip(row_k) {
                    *x -= l * y;
                }
            }
        }
        Self {
            n,
            lu,
            perm,
            lifted_pivots: lifted,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves A x = b.
    pub fn solve(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<C<T>> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s = row
                .iter()
                .zip(&x[..i])
                .fold(C::zero(), |acc, (&l, &xj)| acc + l * xj);
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s = row
                .iter()
                .zip(&x[i + 1..])
                .fold(C::zero(), |acc, (&u, &xj)| acc + u * xj);
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }

    /// Solves A† x = b.
    pub fn solve_adjoint(&self, b: &[C<T>]) -> Vec<C<T>> {
        let n = self.n;
        assert_eq!(b.len(), n);
        // A† = U† L† P, so solve U† y = b, then L† z = y, then x = Pᵀ z.
        let mut y = b.to_vec();
        for i in 0..n {
            y[i] = y[i] / self.lu[i * n + i].conj();
            let yi = y[i];
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            for (yj, &u) in y[i + 1..].iter_mut().zip(row) {
                *yj -= u.conj() * yi;
            }
        }
        for i in (0..n).rev() {
            let yi = y[i];
            let row = &self.lu[i * n..i * n + i];
            for (yj, &l) in y[..i].iter_mut().zip(row) {
                *yj -= l.conj() * yi;
            }
        }
        let mut x = vec![C::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }
}
