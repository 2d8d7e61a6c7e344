//! Truncated Fock space: ladder operators, the dissipator L = a^k − α^k I,
//! the commutator M = [L, L†], the weight S = √(I + L†L), and the coherent,
//! cat and kernel states of the k-photon process.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numerics::{orthonormalize, psd_sqrt, vec_dot, vec_norm, ComplexMatrix};
use crate::scalar::{cr, Real, C};

/// Truncation dimension, photon order and drive amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FockConfig {
    /// Number of retained Fock levels |0⟩ … |dim−1⟩.
    pub dim: usize,
    /// Photon order of the drive and loss.
    pub k: usize,
    /// Real drive amplitude α ≥ 0.
    pub alpha: f64,
}

impl FockConfig {
    /// Config with the default truncation for (k, α).
    pub fn new(k: usize, alpha: f64) -> Result<Self> {
        Self::with_dim(k, alpha, Self::default_dim(k, alpha))
    }

    pub fn with_dim(k: usize, alpha: f64, dim: usize) -> Result<Self> {
        let cfg = Self { dim, k, alpha };
        cfg.validate()?;
        if cfg.below_guard() {
            log::warn!(
                "dim = {dim} is below the truncation guard {:.1} for k = {k}, alpha = {alpha}",
                cfg.guard()
            );
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("photon order k must be >= 1".into()));
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "alpha must be a finite non-negative real, got {}",
                self.alpha
            )));
        }
        if self.dim <= self.k {
            return Err(Error::InvalidParameter(format!(
                "dim = {} must exceed k = {}",
                self.dim, self.k
            )));
        }
        Ok(())
    }

    /// α² + 10α + 4k: below this many levels the truncation corrupts the
    /// kernel states.
    pub fn guard(&self) -> f64 {
        guard(self.k, self.alpha)
    }

    pub fn below_guard(&self) -> bool {
        (self.dim as f64) < self.guard()
    }

    /// ⌈guard⌉ rounded up to a multiple of k, plus 20 levels of headroom.
    pub fn default_dim(k: usize, alpha: f64) -> usize {
        let k = k.max(1);
        let g = guard(k, alpha).ceil().max(1.0) as usize;
        g.div_ceil(k) * k + 20
    }

    /// α^k as a real scalar.
    pub fn alpha_pow_k<T: Real>(&self) -> T {
        T::lit(self.alpha).powi(self.k as i32)
    }
}

fn guard(k: usize, alpha: f64) -> f64 {
    alpha * alpha + 10.0 * alpha + 4.0 * k as f64
}

/// (n+1)(n+2)…(n+k).
pub fn rising_product(n: usize, k: usize) -> f64 {
    (1..=k).map(|j| (n + j) as f64).product()
}

/// n(n−1)…(n−k+1), zero when n < k.
pub fn falling_product(n: usize, k: usize) -> f64 {
    if n < k {
        return 0.0;
    }
    (0..k).map(|j| (n - j) as f64).product()
}

/// Fock-basis amplitudes of a pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    pub amplitudes: Vec<C<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn new(amplitudes: Vec<C<T>>) -> Self {
        Self { amplitudes }
    }

    pub fn fock(dim: usize, n: usize) -> Self {
        let mut amplitudes = vec![C::zero(); dim];
        amplitudes[n] = C::one();
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> T {
        vec_norm(&self.amplitudes)
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        for z in &mut self.amplitudes {
            *z = *z / n;
        }
        self
    }

    pub fn dot(&self, other: &Self) -> C<T> {
        vec_dot(&self.amplitudes, &other.amplitudes)
    }

    /// |ψ⟩⟨ψ|.
    pub fn projector(&self) -> ComplexMatrix<T> {
        ComplexMatrix::outer(&self.amplitudes, &self.amplitudes)
    }
}

/// a with a|n⟩ = √n |n−1⟩.
pub fn annihilation<T: Real>(cfg: &FockConfig) -> ComplexMatrix<T> {
    let mut a = ComplexMatrix::zeros(cfg.dim);
    for n in 1..cfg.dim {
        a[(n - 1, n)] = cr(T::from_usize_lossy(n).sqrt());
    }
    a
}

pub fn creation<T: Real>(cfg: &FockConfig) -> ComplexMatrix<T> {
    annihilation::<T>(cfg).adjoint()
}

pub fn number_op<T: Real>(cfg: &FockConfig) -> ComplexMatrix<T> {
    let diag: Vec<T> = (0..cfg.dim).map(T::from_usize_lossy).collect();
    ComplexMatrix::from_real_diag(&diag)
}

/// Coefficients of a^k: (a^k)_{n,n+k} = √((n+1)…(n+k)) for n + k < dim.
pub fn ladder_coefficients<T: Real>(cfg: &FockConfig) -> Vec<T> {
    (0..cfg.dim.saturating_sub(cfg.k))
        .map(|n| T::lit(rising_product(n, cfg.k)).sqrt())
        .collect()
}

/// L = a^k − α^k I.
pub fn lindblad_l<T: Real>(cfg: &FockConfig) -> ComplexMatrix<T> {
    let c = cfg.alpha_pow_k::<T>();
    let mut l = ComplexMatrix::from_real_diag(&vec![-c; cfg.dim]);
    for (n, s) in ladder_coefficients::<T>(cfg).into_iter().enumerate() {
        l[(n, n + cfg.k)] = cr(s);
    }
    l
}

/// Diagonal of M = (N+I)…(N+kI) − N(N−I)⁺…(N−(k−1)I)⁺.
pub fn commutator_m_diagonal<T: Real>(cfg: &FockConfig) -> Vec<T> {
    (0..cfg.dim)
        .map(|n| T::lit(rising_product(n, cfg.k) - falling_product(n, cfg.k)))
        .collect()
}

/// The closed-form commutator M as a diagonal matrix. It agrees with
/// LL† − L†L on indices n < dim − k; the top k levels are truncation
/// artefacts of the finite matrices.
pub fn commutator_m<T: Real>(cfg: &FockConfig) -> ComplexMatrix<T> {
    ComplexMatrix::from_real_diag(&commutator_m_diagonal::<T>(cfg))
}

/// S = √(I + L†L).
pub fn weight_s<T: Real>(cfg: &FockConfig) -> Result<ComplexMatrix<T>> {
    let l = lindblad_l::<T>(cfg);
    let mut g = l.adjoint().matmul(&l);
    g += &ComplexMatrix::identity(cfg.dim);
    psd_sqrt(&g.hermitian_part())
}

fn check_tail(cfg: &FockConfig, modulus: f64) -> Result<()> {
    let required = modulus * modulus + 10.0 * modulus;
    if required > cfg.dim as f64 {
        return Err(Error::TailTooHeavy {
            required,
            dim: cfg.dim,
        });
    }
    Ok(())
}

/// Unnormalized series Σ βⁿ/√n! |n⟩ truncated to `dim` levels.
fn coherent_series<T: Real>(dim: usize, beta: C<T>) -> Vec<C<T>> {
    let mut c = Vec::with_capacity(dim);
    let mut term: C<T> = C::one();
    c.push(term);
    for n in 1..dim {
        term = term * beta / T::from_usize_lossy(n).sqrt();
        c.push(term);
    }
    c
}

/// Coherent state |β⟩, renormalized after truncation.
pub fn coherent_state<T: Real>(cfg: &FockConfig, beta: C<T>) -> Result<StateVector<T>> {
    check_tail(cfg, beta.norm().as_f64())?;
    Ok(StateVector::new(coherent_series(cfg.dim, beta)).normalized())
}

/// α_m = α e^{2iπm/k}.
pub fn cat_amplitudes<T: Real>(cfg: &FockConfig) -> Vec<C<T>> {
    let k = cfg.k;
    (1..=k)
        .map(|m| {
            let phase = T::lit(2.0 * std::f64::consts::PI * m as f64 / k as f64);
            Complex::from_polar(T::lit(cfg.alpha), phase)
        })
        .collect()
}

/// |C^ℓ⟩ ∝ Σ_m e^{2iπℓm/k} |α_m⟩, normalized numerically.
pub fn cat_state<T: Real>(cfg: &FockConfig, ell: usize) -> Result<StateVector<T>> {
    if !(cfg.alpha > 0.0) {
        return Err(Error::InvalidParameter("cat states need alpha > 0".into()));
    }
    check_tail(cfg, cfg.alpha)?;
    let k = cfg.k;
    let ell = ell % k;
    let mut amp = vec![C::<T>::zero(); cfg.dim];
    for (idx, beta) in cat_amplitudes::<T>(cfg).into_iter().enumerate() {
        let m = idx + 1;
        let phase = Complex::from_polar(
            T::one(),
            T::lit(2.0 * std::f64::consts::PI * (ell * m) as f64 / k as f64),
        );
        for (a, c) in amp.iter_mut().zip(coherent_series(cfg.dim, beta)) {
            *a += phase * c;
        }
    }
    // Exact cancellations leave round-off on the other residue classes.
    let n = vec_norm(&amp);
    let floor = n * T::tol(1e-13);
    for a in &mut amp {
        if a.norm() < floor {
            *a = C::zero();
        }
    }
    Ok(StateVector::new(amp).normalized())
}

/// Orthonormal basis of the kernel of L built from the ladder recurrence
/// ψ_{m+k} = α^k ψ_m / √((m+1)…(m+k)), one vector per residue class mod k.
pub fn kernel_basis<T: Real>(cfg: &FockConfig) -> Vec<StateVector<T>> {
    let c = cfg.alpha_pow_k::<T>();
    let ladder = ladder_coefficients::<T>(cfg);
    let raw: Vec<Vec<C<T>>> = (0..cfg.k)
        .map(|r| {
            let mut psi = vec![C::zero(); cfg.dim];
            psi[r] = C::one();
            let mut m = r;
            while m + cfg.k < cfg.dim {
                psi[m + cfg.k] = psi[m] * c / ladder[m];
                m += cfg.k;
            }
            psi
        })
        .collect();
    orthonormalize(&raw, T::tol(1e-12))
        .into_iter()
        .map(StateVector::new)
        .collect()
}
