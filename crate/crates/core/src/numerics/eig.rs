//! Hermitian eigendecomposition (cyclic Jacobi) and the spectral functions
//! built on it: trace norm, positive/negative split, PSD square root and the
//! eigenbasis Sylvester solver.

use num_traits::Zero;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::{cr, Real, C};

const MAX_SWEEPS: usize = 100;
const HERMITIAN_TOL: f64 = 1e-12;
const OFF_DIAGONAL_TOL: f64 = 1e-14;
const PSD_CLAMP: f64 = 1e-10;
const PD_FLOOR: f64 = 1e-12;

/// A = U diag(λ) U† with λ ascending and U unitary.
#[derive(Clone, Debug)]
pub struct EigDecomposition<T: Real> {
    pub eigenvalues: Vec<T>,
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Real> EigDecomposition<T> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// U f(Λ) U†.
    pub fn map(&self, f: impl Fn(T) -> T) -> ComplexMatrix<T> {
        let n = self.dim();
        let u = &self.eigenvectors;
        let fl: Vec<T> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = C::zero();
                for (m, &w) in fl.iter().enumerate() {
                    if w != T::zero() {
                        acc += u[(i, m)] * u[(j, m)].conj() * w;
                    }
                }
                out[(i, j)] = acc;
                out[(j, i)] = acc.conj();
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.map(|l| l)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eigenvalues.last().copied().unwrap_or_else(T::zero)
    }

    pub fn eigenvector(&self, m: usize) -> Vec<C<T>> {
        self.eigenvectors.column(m)
    }
}

fn check_hermitian<T: Real>(a: &ComplexMatrix<T>) -> Result<()> {
    if !a.is_finite() {
        return Err(Error::NotHermitian {
            asymmetry: f64::NAN,
        });
    }
    let asym = a.hermitian_asymmetry();
    if asym > T::tol(HERMITIAN_TOL) {
        return Err(Error::NotHermitian {
            asymmetry: asym.as_f64(),
        });
    }
    Ok(())
}

fn off_diagonal_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    let n = a.dim();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// The input must be Hermitian to a relative asymmetry of 1e−12; it is
/// Hermitized before the sweeps start. Sweeps stop once the off-diagonal
/// Frobenius mass falls below 1e−14·‖A‖_F.
pub fn hermitian_eig<T: Real>(a: &ComplexMatrix<T>) -> Result<EigDecomposition<T>> {
    check_hermitian(a)?;
    let n = a.dim();
    let mut w = a.hermitian_part();
    let mut u = ComplexMatrix::<T>::identity(n);
    let scale = w.frobenius_norm();
    let threshold = T::tol(OFF_DIAGONAL_TOL) * scale;

    let mut converged = n <= 1 || scale == T::zero();
    let mut sweeps = 0;
    while !converged {
        if off_diagonal_norm(&w) <= threshold {
            converged = true;
            break;
        }
        if sweeps == MAX_SWEEPS {
            break;
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut w, &mut u, p, q);
            }
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            what: "Jacobi eigensolver",
            iterations: MAX_SWEEPS,
            residual: (off_diagonal_norm(&w) / scale).as_f64(),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<T> = (0..n).map(|i| w[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("finite eigenvalues"));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, j| u[(i, order[j])]);
    Ok(EigDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// One Jacobi rotation annihilating w[p,q]; accumulates into u.
fn rotate<T: Real>(w: &mut ComplexMatrix<T>, u: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let apq = w[(p, q)];
    let g = apq.norm();
    if g == T::zero() {
        return;
    }
    let app = w[(p, p)].re;
    let aqq = w[(q, q)].re;
    // Skip rotations below the representable perturbation of the diagonal.
    let eps = T::epsilon() * T::lit(0.01);
    if g <= eps * (app.abs() + aqq.abs()) {
        w[(p, q)] = C::zero();
        w[(q, p)] = C::zero();
        return;
    }
    let phase = apq / g; // e^{iφ}
    let theta = (aqq - app) / (T::lit(2.0) * g);
    let t = if theta == T::zero() {
        T::one()
    } else {
        theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    let n = w.dim();

    // V = [[c, s], [-s e^{-iφ}, c e^{-iφ}]] on the (p, q) plane; W <- V† W V.
    let ph_conj = phase.conj();
    let vqp = -ph_conj * s;
    let vqq = ph_conj * c;
    for r in 0..n {
        let wrp = w[(r, p)];
        let wrq = w[(r, q)];
        w[(r, p)] = wrp * c + wrq * vqp;
        w[(r, q)] = wrp * s + wrq * vqq;
    }
    for r in 0..n {
        let wpr = w[(p, r)];
        let wqr = w[(q, r)];
        w[(p, r)] = wpr * c + wqr * vqp.conj();
        w[(q, r)] = wpr * s + wqr * vqq.conj();
    }
    w[(p, q)] = C::zero();
    w[(q, p)] = C::zero();
    w[(p, p)] = cr(w[(p, p)].re);
    w[(q, q)] = cr(w[(q, q)].re);
    for r in 0..n {
        let urp = u[(r, p)];
        let urq = u[(r, q)];
        u[(r, p)] = urp * c + urq * vqp;
        u[(r, q)] = urp * s + urq * vqq;
    }
}

/// Σ|λ_μ| of a Hermitian matrix.
pub fn trace_norm<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    let eig = hermitian_eig(a)?;
    Ok(eig.eigenvalues.iter().map(|l| l.abs()).sum())
}

/// A = A⁺ − A⁻ with A⁺, A⁻ PSD and mutually orthogonal supports.
pub fn split_pos_neg<T: Real>(
    a: &ComplexMatrix<T>,
) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    let eig = hermitian_eig(a)?;
    let pos = eig.map(|l| l.max(T::zero()));
    let neg = eig.map(|l| (-l).max(T::zero()));
    Ok((pos, neg))
}

/// |A| = A⁺ + A⁻.
pub fn abs_hermitian<T: Real>(a: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    Ok(hermitian_eig(a)?.map(|l| l.abs()))
}

pub fn min_eigenvalue<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    Ok(hermitian_eig(a)?.min_eigenvalue())
}

/// Principal square root of a PSD matrix. Eigenvalues down to −1e−10 are
/// clamped to zero; anything more negative is rejected.
pub fn psd_sqrt<T: Real>(a: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let eig = hermitian_eig(a)?;
    let min = eig.min_eigenvalue();
    if min < -T::tol(PSD_CLAMP) {
        return Err(Error::NotPsd {
            min_eig: min.as_f64(),
        });
    }
    Ok(eig.map(|l| l.max(T::zero()).sqrt()))
}

/// Solves A ρ + ρ A = X for positive definite Hermitian A.
pub fn sylvester_solve<T: Real>(
    a: &ComplexMatrix<T>,
    x: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    SylvesterSolver::new(a)?.solve(x)
}

/// Reusable eigenbasis solver for A ρ + ρ A = X, where ρ_ij = X̃_ij/(a_i + a_j)
/// in A's eigenbasis.
#[derive(Clone, Debug)]
pub struct SylvesterSolver<T: Real> {
    eig: EigDecomposition<T>,
    u_adj: ComplexMatrix<T>,
}

impl<T: Real> SylvesterSolver<T> {
    pub fn new(a: &ComplexMatrix<T>) -> Result<Self> {
        let eig = hermitian_eig(a)?;
        let min = eig.min_eigenvalue();
        if !(min > T::tol(PD_FLOOR)) {
            return Err(Error::NotPositiveDefinite {
                min_eig: min.as_f64(),
            });
        }
        let u_adj = eig.eigenvectors.adjoint();
        Ok(Self { eig, u_adj })
    }

    pub fn eig(&self) -> &EigDecomposition<T> {
        &self.eig
    }

    pub fn solve(&self, x: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let n = self.eig.dim();
        if x.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: x.dim(),
            });
        }
        let u = &self.eig.eigenvectors;
        let mut xt = self.u_adj.matmul(x).matmul(u);
        let a = &self.eig.eigenvalues;
        for i in 0..n {
            for j in 0..n {
                xt[(i, j)] = xt[(i, j)] / (a[i] + a[j]);
            }
        }
        Ok(u.matmul(&xt).matmul(&self.u_adj))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random::{random_hermitian, random_psd};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type M = ComplexMatrix<f64>;

    fn residual(eig: &EigDecomposition<f64>, a: &M) -> f64 {
        (&eig.reconstruct() - a).frobenius_norm() / a.frobenius_norm()
    }

    fn unitarity(u: &M) -> f64 {
        (&u.adjoint().matmul(u) - &M::identity(u.dim())).frobenius_norm()
    }

    #[test]
    fn diagonal_input_is_returned_unchanged() {
        let a = M::from_real_diag(&[1.0, 2.0, 3.0]);
        let eig = hermitian_eig(&a).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 2.0, 3.0]);
        assert!((&eig.eigenvectors - &M::identity(3)).frobenius_norm() < 1e-15);
    }

    #[test]
    fn pauli_x_eigenvalues() {
        let a = M::from_fn(2, |i, j| Complex64::new(if i != j { 1.0 } else { 0.0 }, 0.0));
        let eig = hermitian_eig(&a).unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-15);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..5 {
            let a: M = random_hermitian(20, &mut rng);
            let eig = hermitian_eig(&a).unwrap();
            assert!(residual(&eig, &a) <= 1e-11);
            assert!(unitarity(&eig.eigenvectors) <= 1e-11);
            assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn works_in_single_precision() {
        let a = ComplexMatrix::<f32>::from_fn(4, |i, j| {
            let v = 1.0 / (1.0 + i as f32 + j as f32);
            num_complex::Complex32::new(v, if i < j { 0.1 } else if i > j { -0.1 } else { 0.0 })
        });
        let eig = hermitian_eig(&a).unwrap();
        let err = (&eig.reconstruct() - &a).frobenius_norm() / a.frobenius_norm();
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn rejects_non_hermitian() {
        let a = M::from_fn(2, |i, j| Complex64::new((i + 2 * j) as f64, 0.0));
        assert!(matches!(hermitian_eig(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn trace_norm_simple_cases() {
        let a = M::from_real_diag(&[1.0, -2.0]);
        assert!((trace_norm(&a).unwrap() - 3.0).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p: M = random_psd(6, &mut rng);
        assert!((trace_norm(&p).unwrap() - p.trace().re).abs() < 1e-12);
    }

    #[test]
    fn split_of_diagonal() {
        let (p, n) = split_pos_neg(&M::from_real_diag(&[1.0, -2.0])).unwrap();
        assert!((&p - &M::from_real_diag(&[1.0, 0.0])).frobenius_norm() < 1e-15);
        assert!((&n - &M::from_real_diag(&[0.0, 2.0])).frobenius_norm() < 1e-15);
    }

    #[test]
    fn split_of_psd_is_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a: M = random_psd(5, &mut rng);
        let (p, n) = split_pos_neg(&a).unwrap();
        assert!((&p - &a).frobenius_norm() < 1e-12);
        assert!(n.frobenius_norm() < 1e-12);
    }

    #[test]
    fn split_random_hermitian_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a: M = random_hermitian(10, &mut rng);
        let (p, n) = split_pos_neg(&a).unwrap();
        assert!((&(&p - &n) - &a).frobenius_norm() < 1e-10);
        assert!(p.matmul(&n).frobenius_norm() < 1e-10);
        let abs = abs_hermitian(&a).unwrap();
        assert!((&(&p + &n) - &abs).frobenius_norm() < 1e-10);
        let tn = trace_norm(&a).unwrap();
        assert!((tn - (p.trace().re + n.trace().re)).abs() < 1e-10);
    }

    #[test]
    fn psd_sqrt_cases() {
        let i3 = M::identity(3);
        assert!((&psd_sqrt(&i3).unwrap() - &i3).frobenius_norm() < 1e-15);
        let r = psd_sqrt(&M::from_real_diag(&[4.0, 9.0])).unwrap();
        assert!((&r - &M::from_real_diag(&[2.0, 3.0])).frobenius_norm() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a: M = random_psd(12, &mut rng);
        let s = psd_sqrt(&a).unwrap();
        assert!((&s.matmul(&s) - &a).frobenius_norm() <= 1e-10 * a.frobenius_norm());
        assert!(min_eigenvalue(&s).unwrap() >= -1e-12);
    }

    #[test]
    fn psd_sqrt_clamps_round_off_and_rejects_negative() {
        let ok = M::from_real_diag(&[1.0, -1e-12]);
        assert!(psd_sqrt(&ok).is_ok());
        let bad = M::from_real_diag(&[1.0, -1e-6]);
        assert!(matches!(psd_sqrt(&bad), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn sylvester_identity_halves() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x: M = random_hermitian(6, &mut rng);
        let rho = sylvester_solve(&M::identity(6), &x).unwrap();
        assert!((&rho - &x.scale_real(0.5)).frobenius_norm() < 1e-13);
    }

    #[test]
    fn sylvester_diagonal_is_elementwise() {
        let a = M::from_real_diag(&[1.0, 2.0, 5.0]);
        let x = M::from_fn(3, |i, j| Complex64::new((i + j) as f64, i as f64 - j as f64));
        let rho = sylvester_solve(&a, &x).unwrap();
        let d = [1.0, 2.0, 5.0];
        for i in 0..3 {
            for j in 0..3 {
                assert!((rho[(i, j)] - x[(i, j)] / (d[i] + d[j])).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn sylvester_random_residual_and_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut a: M = random_psd(15, &mut rng);
        a += &M::identity(15).scale_real(0.1);
        let x: M = random_hermitian(15, &mut rng);
        let rho = sylvester_solve(&a, &x).unwrap();
        let res = &(&a.matmul(&rho) + &rho.matmul(&a)) - &x;
        assert!(res.frobenius_norm() <= 1e-10 * x.frobenius_norm());
        assert!(rho.hermitian_asymmetry() <= 1e-11);
    }

    #[test]
    fn sylvester_rejects_singular() {
        let a = M::from_real_diag(&[1.0, 0.0]);
        assert!(matches!(
            sylvester_solve(&a, &M::identity(2)),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }
}
