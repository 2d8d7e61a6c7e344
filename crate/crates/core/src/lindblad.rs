//! The k-photon generator 𝔏(ρ) = LρL† − ½L†Lρ − ½ρL†L, its adjoint, its
//! vectorized matrix, and the L-norm / Lyapunov functional.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fock::{self, FockConfig, StateVector};
use crate::numerics::{hermitian_eig, trace_norm, ComplexMatrix};
use crate::scalar::{cr, Real, C};

/// Relative anti-Hermitian part tolerated on density inputs.
pub const HERMITIAN_TOL: f64 = 1e-11;
pub const TRACE_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-8;
/// Largest vectorized side length (dim²) that is ever materialized.
pub const MAX_SUPEROPERATOR_DIM: usize = 40_000;

/// A validated density matrix: Hermitian, unit trace, positive semidefinite
/// within the tolerances above.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T: Real> {
    mat: ComplexMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(mat: ComplexMatrix<T>) -> Result<Self> {
        if !mat.is_finite() {
            return Err(Error::InvalidDensity("non-finite entries".into()));
        }
        let asym = mat.hermitian_asymmetry();
        if asym > T::tol(HERMITIAN_TOL) {
            return Err(Error::NotHermitian {
                asymmetry: asym.as_f64(),
            });
        }
        let mat = mat.hermitian_part();
        let tr = mat.trace().re;
        if (tr - T::one()).abs() > T::tol(TRACE_TOL) {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let min = hermitian_eig(&mat)?.min_eigenvalue();
        if min < -T::tol(PSD_TOL) {
            return Err(Error::NotPsd {
                min_eig: min.as_f64(),
            });
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix already known to be a density matrix up to round-off.
    pub(crate) fn new_unchecked(mat: ComplexMatrix<T>) -> Self {
        Self { mat }
    }

    pub fn pure(state: &StateVector<T>) -> Self {
        Self {
            mat: state.clone().normalized().projector(),
        }
    }

    /// |n⟩⟨n|.
    pub fn fock(dim: usize, n: usize) -> Self {
        Self::pure(&StateVector::fock(dim, n))
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.mat
    }

    pub fn trace(&self) -> T {
        self.mat.trace().re
    }

    pub fn min_eigenvalue(&self) -> Result<T> {
        Ok(hermitian_eig(&self.mat)?.min_eigenvalue())
    }
}

/// Cached operators for one (k, α, dim). All products with L, L† and L†L go
/// through the single off-diagonal band of a^k, so one generator action costs
/// O(dim²).
#[derive(Clone, Debug)]
pub struct Lindbladian<T: Real> {
    cfg: FockConfig,
    /// α^k.
    shift: T,
    /// (a^k)_{n,n+k}, length dim − k.
    ladder: Vec<T>,
    l: ComplexMatrix<T>,
    ldag_l: ComplexMatrix<T>,
    weight: ComplexMatrix<T>,
}

impl<T: Real> Lindbladian<T> {
    pub fn new(cfg: &FockConfig) -> Result<Self> {
        cfg.validate()?;
        let l = fock::lindblad_l::<T>(cfg);
        let ldag_l = l.adjoint().matmul(&l).hermitian_part();
        Ok(Self {
            cfg: *cfg,
            shift: cfg.alpha_pow_k(),
            ladder: fock::ladder_coefficients(cfg),
            weight: fock::weight_s(cfg)?,
            l,
            ldag_l,
        })
    }

    pub fn config(&self) -> &FockConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.cfg.dim
    }

    pub fn k(&self) -> usize {
        self.cfg.k
    }

    pub fn l(&self) -> &ComplexMatrix<T> {
        &self.l
    }

    pub fn ldag_l(&self) -> &ComplexMatrix<T> {
        &self.ldag_l
    }

    /// S = √(I + L†L).
    pub fn weight(&self) -> &ComplexMatrix<T> {
        &self.weight
    }

    /// Gershgorin bound on ‖L†L‖₂.
    pub fn ldag_l_norm_bound(&self) -> T {
        let n = self.dim();
        (0..n)
            .map(|i| self.ldag_l.row(i).iter().map(|z| z.norm()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    /// L X.
    pub fn left_l(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let (n, k) = (self.dim(), self.k());
        let mut out = x.scale_real(-self.shift);
        for (i, &s) in self.ladder.iter().enumerate() {
            let src = x.row(i + k);
            for j in 0..n {
                out[(i, j)] += src[j] * s;
            }
        }
        out
    }

    /// L† X.
    pub fn left_ldag(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let (n, k) = (self.dim(), self.k());
        let mut out = x.scale_real(-self.shift);
        for (i, &s) in self.ladder.iter().enumerate() {
            let src = x.row(i);
            for j in 0..n {
                out[(i + k, j)] += src[j] * s;
            }
        }
        out
    }

    /// X L†.
    pub fn right_ldag(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let (n, k) = (self.dim(), self.k());
        let mut out = x.scale_real(-self.shift);
        for i in 0..n {
            let src = x.row(i);
            for (j, &s) in self.ladder.iter().enumerate() {
                out[(i, j)] += src[j + k] * s;
            }
        }
        out
    }

    /// X L.
    pub fn right_l(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let (n, k) = (self.dim(), self.k());
        let mut out = x.scale_real(-self.shift);
        for i in 0..n {
            let src = x.row(i);
            for (j, &s) in self.ladder.iter().enumerate() {
                out[(i, j + k)] += src[j] * s;
            }
        }
        out
    }

    /// 𝔏(X) for an arbitrary square X.
    pub fn generator_action(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let lx = self.left_l(x);
        let mut out = self.right_ldag(&lx);
        let half = T::lit(0.5);
        out.axpy(cr(-half), &self.left_ldag(&lx));
        out.axpy(cr(-half), &self.right_l(&self.right_ldag(x)));
        out
    }

    /// 𝔏†(X) = L†XL − ½{L†L, X} for an arbitrary square X.
    pub fn adjoint_action(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        let ldx = self.left_ldag(x);
        let mut out = self.right_l(&ldx);
        let half = T::lit(0.5);
        out.axpy(cr(-half), &self.left_ldag(&self.left_l(x)));
        out.axpy(cr(-half), &self.right_l(&self.right_ldag(x)));
        out
    }

    /// 𝔏(ρ) for Hermitian ρ; the result is Hermitian and traceless.
    pub fn apply_generator(&self, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        self.check_input(rho)?;
        Ok(self.generator_action(rho).hermitian_part())
    }

    /// 𝔄(ρ) = −𝔏(ρ).
    pub fn apply_a(&self, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        Ok(-&self.apply_generator(rho)?)
    }

    fn check_input(&self, rho: &ComplexMatrix<T>) -> Result<()> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: rho.dim(),
            });
        }
        let asym = rho.hermitian_asymmetry();
        if asym > T::tol(HERMITIAN_TOL) {
            return Err(Error::NotHermitian {
                asymmetry: asym.as_f64(),
            });
        }
        Ok(())
    }

    /// The dim²×dim² column-stacked matrix of 𝔏:
    /// conj(L)⊗L − ½ I⊗L†L − ½ (L†L)ᵀ⊗I.
    pub fn vectorize_generator(&self) -> Result<Superoperator<T>> {
        let n = self.dim();
        if n * n > MAX_SUPEROPERATOR_DIM {
            return Err(Error::DimensionTooLarge {
                dim: n * n,
                limit: MAX_SUPEROPERATOR_DIM,
            });
        }
        let id = ComplexMatrix::identity(n);
        let mut mat = self.l.conj().kron(&self.l);
        let half = cr(-T::lit(0.5));
        mat.axpy(half, &id.kron(&self.ldag_l));
        mat.axpy(half, &self.ldag_l.transpose().kron(&id));
        Ok(Superoperator { dim: n, mat })
    }

    /// The matrix of 𝔏† under the Hilbert–Schmidt product, i.e. the conjugate
    /// transpose of the vectorized generator.
    pub fn adjoint_generator(&self) -> Result<Superoperator<T>> {
        let g = self.vectorize_generator()?;
        Ok(Superoperator {
            dim: g.dim,
            mat: g.mat.adjoint(),
        })
    }

    /// Entry of the vectorized generator between |i⟩⟨j| (row) and |p⟩⟨q|
    /// (column).
    pub fn generator_entry(&self, i: usize, j: usize, p: usize, q: usize) -> C<T> {
        let half = T::lit(0.5);
        let mut z = self.l[(j, q)].conj() * self.l[(i, p)];
        if j == q {
            z -= self.ldag_l[(i, p)] * half;
        }
        if i == p {
            z -= self.ldag_l[(q, j)] * half;
        }
        z
    }

    /// The vectorized generator split into its k invariant blocks: 𝔏 maps
    /// |p⟩⟨q| into span{|i⟩⟨j| : i − j ≡ p − q mod k}. Each block lists its
    /// column-stacked indices i + dim·j in increasing order.
    pub fn generator_blocks(&self) -> Result<Vec<SuperBlock<T>>> {
        let n = self.dim();
        if n * n > MAX_SUPEROPERATOR_DIM {
            return Err(Error::DimensionTooLarge {
                dim: n * n,
                limit: MAX_SUPEROPERATOR_DIM,
            });
        }
        let k = self.k();
        let blocks = (0..k)
            .map(|d| {
                let indices: Vec<usize> = (0..n * n)
                    .filter(|&idx| (idx % n + k * n - idx / n) % k == d)
                    .collect();
                let mat = ComplexMatrix::from_fn(indices.len(), |r, c| {
                    let (row, col) = (indices[r], indices[c]);
                    self.generator_entry(row % n, row / n, col % n, col / n)
                });
                SuperBlock { indices, mat }
            })
            .collect();
        Ok(blocks)
    }

    /// ‖ρ‖_L = tr|SρS|.
    pub fn l_norm(&self, rho: &ComplexMatrix<T>) -> Result<T> {
        self.check_input(rho)?;
        let srs = self.weight.matmul(rho).matmul(&self.weight);
        trace_norm(&srs.hermitian_part())
    }

    /// V(ρ) = tr(LρL†) = ‖ρ‖_L − 1 on density matrices.
    pub fn lyapunov_v(&self, rho: &DensityMatrix<T>) -> T {
        self.lyapunov_raw(rho.as_matrix())
    }

    pub(crate) fn lyapunov_raw(&self, rho: &ComplexMatrix<T>) -> T {
        let lr = self.left_l(rho);
        // tr(Lρ L†) = Σ_ij (Lρ)_ij conj(L)_ij
        lr.as_slice()
            .iter()
            .zip(self.l.as_slice())
            .fold(C::zero(), |acc: C<T>, (&x, &y)| acc + x * y.conj())
            .re
    }
}

/// A linear map on dim×dim matrices stored as a dim²×dim² matrix acting on
/// column-stacked vectors.
#[derive(Clone, Debug)]
pub struct Superoperator<T: Real> {
    pub dim: usize,
    pub mat: ComplexMatrix<T>,
}

impl<T: Real> Superoperator<T> {
    pub fn apply(&self, x: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        ComplexMatrix::from_vec_columns(self.dim, &self.mat.mul_vec(&x.vec_columns()))
    }
}

/// One invariant block of the vectorized generator.
#[derive(Clone, Debug)]
pub struct SuperBlock<T: Real> {
    /// Column-stacked indices of the block, ascending.
    pub indices: Vec<usize>,
    pub mat: ComplexMatrix<T>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::random::{ginibre, random_density_matrix, random_hermitian};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(k: usize, alpha: f64, dim: usize) -> Lindbladian<f64> {
        Lindbladian::new(&FockConfig { dim, k, alpha }).unwrap()
    }

    fn dense_generator(m: &Lindbladian<f64>, x: &ComplexMatrix<f64>) -> ComplexMatrix<f64> {
        let l = m.l();
        let ld = l.adjoint();
        let ltl = ld.matmul(l);
        let mut out = l.matmul(x).matmul(&ld);
        out.axpy(cr(-0.5), &ltl.matmul(x));
        out.axpy(cr(-0.5), &x.matmul(&ltl));
        out
    }

    #[test]
    fn band_products_match_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 1..=3 {
            let m = model(k, 0.9, 14);
            let x = ginibre::<f64, _>(14, &mut rng);
            let l = m.l().clone();
            let ld = l.adjoint();
            assert!((&m.left_l(&x) - &l.matmul(&x)).max_abs() < 1e-12);
            assert!((&m.left_ldag(&x) - &ld.matmul(&x)).max_abs() < 1e-12);
            assert!((&m.right_l(&x) - &x.matmul(&l)).max_abs() < 1e-12);
            assert!((&m.right_ldag(&x) - &x.matmul(&ld)).max_abs() < 1e-12);
            let g = dense_generator(&m, &x);
            assert!((&m.generator_action(&x) - &g).max_abs() < 1e-11 * g.max_abs());
        }
    }

    #[test]
    fn generator_fixes_vacuum_at_zero_drive() {
        let m = model(1, 0.0, 8);
        let rho = DensityMatrix::<f64>::fock(8, 0);
        assert!(m.apply_generator(rho.as_matrix()).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn generator_on_one_photon_k1() {
        let m = model(1, 0.0, 8);
        let rho = DensityMatrix::<f64>::fock(8, 1);
        let out = m.apply_generator(rho.as_matrix()).unwrap();
        let mut expected = ComplexMatrix::zeros(8);
        expected[(0, 0)] = cr(1.0);
        expected[(1, 1)] = cr(-1.0);
        assert!((&out - &expected).max_abs() < 1e-15);
    }

    #[test]
    fn generator_on_two_photons_k2() {
        let m = model(2, 0.0, 8);
        let out = m
            .apply_generator(DensityMatrix::<f64>::fock(8, 2).as_matrix())
            .unwrap();
        let mut expected = ComplexMatrix::zeros(8);
        expected[(0, 0)] = cr(2.0);
        expected[(2, 2)] = cr(-2.0);
        assert!((&out - &expected).max_abs() < 1e-14);
    }

    #[test]
    fn generator_is_traceless_and_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = model(3, 1.1, 30);
        for _ in 0..5 {
            let rho = random_density_matrix::<f64, _>(30, 12, &mut rng);
            let out = m.apply_generator(&rho).unwrap();
            assert!(out.trace().norm() < 1e-12 * out.frobenius_norm().max(1.0));
            assert!(out.hermitian_asymmetry() < 1e-14);
        }
    }

    #[test]
    fn generator_rejects_non_hermitian() {
        let m = model(1, 0.0, 4);
        let mut x = ComplexMatrix::<f64>::zeros(4);
        x[(0, 1)] = cr(1.0);
        assert!(matches!(
            m.apply_generator(&x),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn vectorized_generator_and_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let m = model(2, 0.8, 9);
        let g = m.vectorize_generator().unwrap();
        let ga = m.adjoint_generator().unwrap();
        for _ in 0..3 {
            let x = ginibre::<f64, _>(9, &mut rng);
            let y = ginibre::<f64, _>(9, &mut rng);
            let direct = dense_generator(&m, &x);
            assert!((&g.apply(&x) - &direct).max_abs() < 1e-12 * direct.max_abs());
            assert!((&ga.apply(&y) - &m.adjoint_action(&y)).max_abs() < 1e-11);
            // ⟨Y, 𝔏X⟩ = ⟨𝔏†Y, X⟩
            let lhs = y.adjoint().trace_product(&g.apply(&x));
            let rhs = m.adjoint_action(&y).adjoint().trace_product(&x);
            assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
        }
        assert!(matches!(
            model(1, 0.0, 201).vectorize_generator(),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn blocks_reassemble_the_vectorized_generator() {
        for k in 1..=3 {
            let m = model(k, 1.1, 8);
            let full = m.vectorize_generator().unwrap().mat;
            let blocks = m.generator_blocks().unwrap();
            assert_eq!(blocks.iter().map(|b| b.indices.len()).sum::<usize>(), 64);
            let mut assembled = ComplexMatrix::zeros(64);
            for b in &blocks {
                for (r, &i) in b.indices.iter().enumerate() {
                    for (c, &j) in b.indices.iter().enumerate() {
                        assembled[(i, j)] = b.mat[(r, c)];
                    }
                }
            }
            assert!((&assembled - &full).max_abs() < 1e-13);
        }
    }

    #[test]
    fn photon_loss_adjoint_on_number_operator() {
        let c = FockConfig { dim: 10, k: 1, alpha: 0.0 };
        let m = Lindbladian::<f64>::new(&c).unwrap();
        let n = fock::number_op::<f64>(&c);
        let out = m.adjoint_action(&n);
        // Exact except on the top level, where a†a ≠ aa† − I.
        for i in 0..9 {
            for j in 0..10 {
                let expect = if i == j { -(i as f64) } else { 0.0 };
                assert!((out[(i, j)].re - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_is_adjoint_fixed_point() {
        let m = model(3, 1.0, 15);
        let out = m.adjoint_action(&ComplexMatrix::identity(15));
        assert!(out.max_abs() < 1e-12);
    }

    #[test]
    fn l_norm_and_lyapunov() {
        let m = model(1, 0.0, 10);
        let rho = DensityMatrix::<f64>::fock(10, 0);
        assert!((m.l_norm(rho.as_matrix()).unwrap() - 1.0).abs() < 1e-12);
        let rho = DensityMatrix::<f64>::fock(10, 3);
        assert!((m.l_norm(rho.as_matrix()).unwrap() - 4.0).abs() < 1e-12);
        assert!((m.lyapunov_v(&rho) - 3.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = model(2, 1.2, 24);
        for _ in 0..4 {
            let rho = DensityMatrix::new(random_density_matrix::<f64, _>(24, 10, &mut rng)).unwrap();
            let v = m.lyapunov_v(&rho);
            let ln = m.l_norm(rho.as_matrix()).unwrap();
            assert!((ln - 1.0 - v).abs() < 1e-10 * ln);
            let dense = m.l().matmul(rho.as_matrix()).matmul(&m.l().adjoint()).trace().re;
            assert!((dense - v).abs() < 1e-10 * v.max(1.0));
        }
    }

    #[test]
    fn l_norm_is_a_norm_on_hermitian_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = model(2, 0.5, 12);
        let x = random_hermitian::<f64, _>(12, &mut rng);
        let y = random_hermitian::<f64, _>(12, &mut rng);
        let nx = m.l_norm(&x).unwrap();
        let ny = m.l_norm(&y).unwrap();
        let nxy = m.l_norm(&(&x + &y)).unwrap();
        assert!(nxy <= nx + ny + 1e-10);
        assert!((m.l_norm(&x.scale_real(-2.5)).unwrap() - 2.5 * nx).abs() < 1e-9 * nx);
        assert!(m.l_norm(&ComplexMatrix::zeros(12)).unwrap() == 0.0);
    }

    #[test]
    fn density_matrix_validation() {
        let mut x = ComplexMatrix::<f64>::zeros(3);
        x[(0, 0)] = cr(2.0);
        assert!(matches!(DensityMatrix::new(x.clone()), Err(Error::InvalidDensity(_))));
        x[(0, 0)] = cr(1.5);
        x[(1, 1)] = cr(-0.5);
        assert!(matches!(DensityMatrix::new(x), Err(Error::NotPsd { .. })));
    }
}
