//! Conserved observables of the k-photon dynamics, the matching steady-state
//! basis, and prediction of the limit state from an initial state.

use std::f64::consts::PI;

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{self, FockConfig};
use crate::lindblad::{DensityMatrix, Lindbladian, SuperBlock};
use crate::numerics::random::complex_normal;
use crate::numerics::{
    hermitian_eig, orthonormalize, thin_svd, vec_dot, vec_norm, ComplexMatrix, LuDecomposition,
};
use crate::scalar::{cr, Real, C};

/// Singular values at or below this fraction of σ_max count as null.
pub const NULL_THRESHOLD: f64 = 1e-8;
/// Required ratio between the first non-null and the last null singular value.
pub const MIN_GAP_RATIO: f64 = 1e3;
pub const MAX_PAIRING_CONDITION: f64 = 1e8;
/// Extra subspace-iteration vectors per block beyond the k expected null ones.
const EXTRA_VECTORS: usize = 4;
const SUBSPACE_ITERATIONS: usize = 24;
const POWER_ITERATIONS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InvariantKind {
    Cos,
    Sin,
}

/// Q^cos_m = Σ cos(2πmn/k)|n⟩⟨n| or Q^sin_m = Σ sin(2πmn/k)|n⟩⟨n|.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitInvariant<T: Real> {
    pub kind: InvariantKind,
    pub m: usize,
    pub diag: Vec<T>,
}

impl<T: Real> ExplicitInvariant<T> {
    pub fn matrix(&self) -> ComplexMatrix<T> {
        ComplexMatrix::from_real_diag(&self.diag)
    }

    /// tr(Qρ).
    pub fn expectation(&self, rho: &ComplexMatrix<T>) -> T {
        self.diag
            .iter()
            .enumerate()
            .map(|(n, &q)| q * rho[(n, n)].re)
            .sum()
    }

    pub fn label(&self) -> String {
        match self.kind {
            InvariantKind::Cos => format!("Qcos_{}", self.m),
            InvariantKind::Sin => format!("Qsin_{}", self.m),
        }
    }
}

/// cos or sin of 2π·(mn mod k)/k; reducing first keeps exact zeros exact.
fn periodic_value(kind: InvariantKind, m: usize, n: usize, k: usize) -> f64 {
    let r = (m * n) % k;
    if r == 0 {
        return if kind == InvariantKind::Cos { 1.0 } else { 0.0 };
    }
    if 2 * r == k {
        return if kind == InvariantKind::Cos { -1.0 } else { 0.0 };
    }
    let theta = 2.0 * PI * r as f64 / k as f64;
    match kind {
        InvariantKind::Cos => theta.cos(),
        InvariantKind::Sin => theta.sin(),
    }
}

/// The k diagonal invariants: Q^cos_m for m = 0..=⌈(k−1)/2⌉ and Q^sin_m for
/// m = 1..=⌊(k−1)/2⌋.
pub fn explicit_invariants<T: Real>(cfg: &FockConfig) -> Vec<ExplicitInvariant<T>> {
    let k = cfg.k;
    let make = |kind, m| ExplicitInvariant {
        kind,
        m,
        diag: (0..cfg.dim)
            .map(|n| T::lit(periodic_value(kind, m, n, k)))
            .collect(),
    };
    let cos = (0..=(k - 1).div_ceil(2)).map(|m| make(InvariantKind::Cos, m));
    let sin = (1..=(k - 1) / 2).map(|m| make(InvariantKind::Sin, m));
    cos.chain(sin).collect()
}

/// k² conserved observables and k² steady states of the truncated generator,
/// both Hermitian and orthonormal in the real Frobenius inner product.
#[derive(Clone, Debug)]
pub struct InvariantSet<T: Real> {
    pub observables: Vec<ComplexMatrix<T>>,
    pub steady_basis: Vec<ComplexMatrix<T>>,
    /// P_ij = tr(Q_i σ_j), real k²×k², stored as a complex matrix with zero
    /// imaginary part.
    pub pairing: ComplexMatrix<T>,
    pub pairing_condition: T,
    /// Smallest Ritz singular values of the generator, ascending.
    pub singular_values: Vec<T>,
    pub sigma_max: T,
    /// σ_{k²+1} / σ_{k²}.
    pub gap_ratio: T,
    pairing_lu: LuDecomposition<T>,
}

/// Limit-state prediction. Not projected onto the PSD cone; the eigenvalue
/// floor is reported instead.
#[derive(Clone, Debug)]
pub struct LimitPrediction<T: Real> {
    pub rho: ComplexMatrix<T>,
    pub trace: T,
    pub min_eigenvalue: T,
}

impl<T: Real> LimitPrediction<T> {
    pub fn density(&self) -> Result<DensityMatrix<T>> {
        DensityMatrix::new(self.rho.clone())
    }
}

struct BlockSpectrum<T: Real> {
    /// Ascending Ritz singular values with their vectors in the full
    /// column-stacked space.
    right: Vec<(T, Vec<C<T>>)>,
    left: Vec<(T, Vec<C<T>>)>,
}

fn power_sigma_max<T: Real>(b: &ComplexMatrix<T>, rng: &mut ChaCha8Rng) -> T {
    let n = b.dim();
    let mut x: Vec<C<T>> = (0..n).map(|_| complex_normal(rng)).collect();
    let mut sigma = T::zero();
    for _ in 0..POWER_ITERATIONS {
        let nx = vec_norm(&x);
        if nx == T::zero() {
            break;
        }
        x.iter_mut().for_each(|z| *z = *z / nx);
        let y = b.mul_vec(&x);
        sigma = vec_norm(&y);
        x = b.adjoint_mul_vec(&y);
    }
    sigma
}

fn normalize_columns<T: Real>(cols: &mut [Vec<C<T>>]) {
    for c in cols.iter_mut() {
        let n = vec_norm(c);
        if n > T::zero() {
            c.iter_mut().for_each(|z| *z = *z / n);
        }
    }
}

/// Inverse subspace iteration with (B†B)⁻¹ (right) or (BB†)⁻¹ (left), then a
/// Rayleigh–Ritz step through a one-sided Jacobi SVD.
fn block_spectrum<T: Real>(
    block: &SuperBlock<T>,
    full_len: usize,
    want: usize,
    sigma_max: T,
    rng: &mut ChaCha8Rng,
) -> Result<BlockSpectrum<T>> {
    let b = &block.mat;
    let n = b.dim();
    let p = (want + EXTRA_VECTORS).min(n);
    let lu = LuDecomposition::new_regularized(b, sigma_max * T::tol(1e-14));
    let b_adj = b.adjoint();
    let embed = |v: &[C<T>]| {
        let mut out = vec![C::zero(); full_len];
        for (&i, &z) in block.indices.iter().zip(v) {
            out[i] = z;
        }
        out
    };
    let mut run = |adjoint: bool| -> Result<Vec<(T, Vec<C<T>>)>> {
        let mut x: Vec<Vec<C<T>>> = (0..p)
            .map(|_| (0..n).map(|_| complex_normal(rng)).collect())
            .collect();
        for _ in 0..SUBSPACE_ITERATIONS {
            let mut y: Vec<Vec<C<T>>> = x
                .iter()
                .map(|c| {
                    if adjoint {
                        lu.solve_adjoint(&lu.solve(c))
                    } else {
                        lu.solve(&lu.solve_adjoint(c))
                    }
                })
                .collect();
            normalize_columns(&mut y);
            let mut q = orthonormalize(&y, T::tol(1e-10));
            // Directions lost to round-off are replaced with fresh noise.
            while q.len() < p {
                q.push((0..n).map(|_| complex_normal(rng)).collect());
                q = orthonormalize(&q, T::tol(1e-10));
            }
            x = q;
        }
        let op = if adjoint { &b_adj } else { b };
        let images: Vec<Vec<C<T>>> = x.iter().map(|c| op.mul_vec(c)).collect();
        let svd = thin_svd(&images)?;
        Ok(svd
            .singular_values
            .iter()
            .enumerate()
            .map(|(c, &s)| {
                let mut v = vec![C::zero(); n];
                for (j, xj) in x.iter().enumerate() {
                    let w = svd.right[(j, c)];
                    for (vi, &xi) in v.iter_mut().zip(xj) {
                        *vi += xi * w;
                    }
                }
                (s, embed(&v))
            })
            .collect())
    };
    let right = run(false)?;
    let left = run(true)?;
    Ok(BlockSpectrum { right, left })
}

/// Hermitian parts (X + X†)/2 and (X − X†)/2i of each null vector, reduced to
/// a real-orthonormal basis.
fn hermitian_basis<T: Real>(dim: usize, vectors: &[Vec<C<T>>]) -> Vec<ComplexMatrix<T>> {
    let half = T::lit(0.5);
    let mut flat = Vec::with_capacity(2 * vectors.len());
    for v in vectors {
        let x = ComplexMatrix::from_vec_columns(dim, v);
        let xa = x.adjoint();
        let re = (&x + &xa).scale_real(half);
        let im = (&x - &xa).scale(C::new(T::zero(), -half));
        for h in [re, im] {
            flat.push(
                h.as_slice()
                    .iter()
                    .flat_map(|z| [cr(z.re), cr(z.im)])
                    .collect::<Vec<_>>(),
            );
        }
    }
    orthonormalize(&flat, T::tol(1e-6))
        .into_iter()
        .map(|f| {
            let data = f.chunks(2).map(|p| C::new(p[0].re, p[1].re)).collect();
            ComplexMatrix::from_row_major(dim, data).hermitian_part()
        })
        .collect()
}

/// Near-null spaces of 𝔏 and 𝔏† computed block by block, Hermitized and
/// paired.
pub fn numeric_invariants<T: Real>(model: &Lindbladian<T>) -> Result<InvariantSet<T>> {
    let k = model.k();
    let dim = model.dim();
    let expected = k * k;
    let blocks = model.generator_blocks()?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let sigma_max = blocks
        .iter()
        .map(|b| power_sigma_max(&b.mat, &mut rng))
        .fold(T::zero(), T::max);

    let mut right = Vec::new();
    let mut left = Vec::new();
    for block in &blocks {
        let spec = block_spectrum(block, dim * dim, k, sigma_max, &mut rng)?;
        right.extend(spec.right);
        left.extend(spec.left);
    }
    let by_sigma = |a: &(T, Vec<C<T>>), b: &(T, Vec<C<T>>)| a.0.partial_cmp(&b.0).expect("finite");
    right.sort_by(by_sigma);
    left.sort_by(by_sigma);

    let threshold = sigma_max * T::lit(NULL_THRESHOLD);
    let singular_values: Vec<T> = right.iter().map(|(s, _)| *s).collect();
    let found = singular_values.iter().filter(|&&s| s <= threshold).count();
    let found_left = left.iter().filter(|(s, _)| *s <= threshold).count();
    let floor = sigma_max * T::epsilon();
    let gap_ratio = match (singular_values.get(expected.wrapping_sub(1)), singular_values.get(expected)) {
        (Some(&last_null), Some(&first)) => first / last_null.max(floor),
        _ => T::zero(),
    };
    if found != expected || found_left != expected || !(gap_ratio > T::lit(MIN_GAP_RATIO)) {
        return Err(Error::RankMismatch {
            found,
            expected,
            gap: gap_ratio.as_f64(),
            singular_values: singular_values
                .iter()
                .take(expected + 2)
                .map(|s| (*s / sigma_max).as_f64())
                .collect(),
        });
    }

    let right_null: Vec<_> = right.into_iter().take(expected).map(|(_, v)| v).collect();
    let left_null: Vec<_> = left.into_iter().take(expected).map(|(_, v)| v).collect();
    let steady_basis = hermitian_basis(dim, &right_null);
    let observables = hermitian_basis(dim, &left_null);
    if steady_basis.len() != expected || observables.len() != expected {
        return Err(Error::RankMismatch {
            found: steady_basis.len().min(observables.len()),
            expected,
            gap: gap_ratio.as_f64(),
            singular_values: Vec::new(),
        });
    }

    let pairing = ComplexMatrix::from_fn(expected, |i, j| {
        cr(observables[i].trace_product(&steady_basis[j]).re)
    });
    let cols: Vec<Vec<C<T>>> = (0..expected).map(|j| pairing.column(j)).collect();
    let sv = thin_svd(&cols)?.singular_values;
    let pairing_condition = sv[sv.len() - 1] / sv[0].max(T::min_positive_value());
    let pairing_lu = LuDecomposition::new(&pairing)
        .map_err(|_| Error::IllConditionedPairing { cond: f64::INFINITY })?;
    Ok(InvariantSet {
        observables,
        steady_basis,
        pairing,
        pairing_condition,
        singular_values: singular_values.into_iter().take(expected + EXTRA_VECTORS).collect(),
        sigma_max,
        gap_ratio,
        pairing_lu,
    })
}

impl<T: Real> InvariantSet<T> {
    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    /// Largest ‖𝔏†(Q)‖_F / ‖Q‖_F over the observables.
    pub fn observable_residual(&self, model: &Lindbladian<T>) -> T {
        self.observables
            .iter()
            .map(|q| model.adjoint_action(q).frobenius_norm() / q.frobenius_norm())
            .fold(T::zero(), T::max)
    }

    /// Largest ‖𝔏(σ)‖_F / ‖σ‖_F over the steady basis.
    pub fn steady_residual(&self, model: &Lindbladian<T>) -> T {
        self.steady_basis
            .iter()
            .map(|s| model.generator_action(s).frobenius_norm() / s.frobenius_norm())
            .fold(T::zero(), T::max)
    }

    /// The steady state ρ̄ in span(σ_j) with tr(Q_i ρ̄) = tr(Q_i ρ0) for all i.
    pub fn predict_limit(&self, rho0: &DensityMatrix<T>) -> Result<LimitPrediction<T>> {
        predict_limit(self, rho0)
    }
}

pub fn predict_limit<T: Real>(
    inv: &InvariantSet<T>,
    rho0: &DensityMatrix<T>,
) -> Result<LimitPrediction<T>> {
    if !(inv.pairing_condition <= T::lit(MAX_PAIRING_CONDITION)) {
        return Err(Error::IllConditionedPairing {
            cond: inv.pairing_condition.as_f64(),
        });
    }
    let dim = rho0.dim();
    if inv.observables[0].dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: inv.observables[0].dim(),
            got: dim,
        });
    }
    let q: Vec<C<T>> = inv
        .observables
        .iter()
        .map(|o| cr(o.trace_product(rho0.as_matrix()).re))
        .collect();
    let c = inv.pairing_lu.solve(&q);
    let mut rho = ComplexMatrix::zeros(dim);
    for (cj, s) in c.iter().zip(&inv.steady_basis) {
        rho.axpy(cr(cj.re), s);
    }
    let rho = rho.hermitian_part();
    let min_eigenvalue = hermitian_eig(&rho)?.min_eigenvalue();
    Ok(LimitPrediction {
        trace: rho.trace().re,
        min_eigenvalue,
        rho,
    })
}

/// One (ℓ, Q) pair of the cat eigenvalue check.
#[derive(Clone, Debug, Serialize)]
pub struct CatEigenEntry {
    pub ell: usize,
    pub kind: InvariantKind,
    pub m: usize,
    /// Rayleigh quotient ⟨C^ℓ|Q|C^ℓ⟩.
    pub measured: f64,
    /// cos(2πℓm/k) or sin(2πℓm/k).
    pub reference: f64,
    /// ‖Q v − μ v‖.
    pub residual: f64,
    pub magnitude_error: f64,
    pub sign_agrees: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CatEigenReport {
    pub entries: Vec<CatEigenEntry>,
}

impl CatEigenReport {
    pub fn max_residual(&self) -> f64 {
        self.entries.iter().map(|e| e.residual).fold(0.0, f64::max)
    }

    pub fn max_magnitude_error(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.magnitude_error)
            .fold(0.0, f64::max)
    }
}

/// Each cat |C^ℓ⟩ is an eigenvector of every explicit invariant. Magnitudes
/// are compared with |cos|, |sin| of 2πℓm/k; signs are measured and recorded.
pub fn cat_eigen_check<T: Real>(cfg: &FockConfig) -> Result<CatEigenReport> {
    let invariants = explicit_invariants::<T>(cfg);
    let mut entries = Vec::new();
    for ell in 0..cfg.k {
        let v = fock::cat_state::<T>(cfg, ell)?;
        for q in &invariants {
            let qv: Vec<C<T>> = v
                .amplitudes
                .iter()
                .zip(&q.diag)
                .map(|(&z, &d)| z * d)
                .collect();
            let mu = vec_dot(&v.amplitudes, &qv).re;
            let residual = qv
                .iter()
                .zip(&v.amplitudes)
                .map(|(&a, &b)| (a - b * mu).norm_sqr())
                .sum::<T>()
                .sqrt();
            let reference = periodic_value(q.kind, q.m, ell, cfg.k);
            let measured = mu.as_f64();
            entries.push(CatEigenEntry {
                ell,
                kind: q.kind,
                m: q.m,
                measured,
                reference,
                residual: residual.as_f64(),
                magnitude_error: (measured.abs() - reference.abs()).abs(),
                sign_agrees: reference.abs() < 1e-12 || measured.signum() == reference.signum(),
            });
        }
    }
    Ok(CatEigenReport { entries })
}
