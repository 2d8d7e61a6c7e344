//! Time integration of dρ/dt = 𝔏(ρ): adaptive explicit RK4, and an implicit
//! stepper built on the resolvent (I + λ𝔄)⁻¹.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::invariants::{explicit_invariants, ExplicitInvariant};
use crate::lindblad::{DensityMatrix, Lindbladian};
use crate::numerics::{hermitian_eig, trace_norm, ComplexMatrix, LuDecomposition, SylvesterSolver};
use crate::scalar::{cr, Real, C};

pub const MIN_STEP: f64 = 1e-10;
pub const MIN_TOL: f64 = 1e-12;
pub const MAX_TOL: f64 = 1e-4;
/// RK runs stop once the minimum eigenvalue falls below −POSITIVITY_FLOOR.
pub const POSITIVITY_FLOOR: f64 = 1e-6;
/// Backward-Euler iterates must stay above −BE_POSITIVITY_FLOOR.
pub const BE_POSITIVITY_FLOOR: f64 = 1e-8;
pub const DEFAULT_SAMPLES: usize = 200;
/// RK4 steps are capped at RK_STABILITY / ‖L†L‖ (row-sum bound). The
/// generator's spectral radius sits just below that bound, and the RK4
/// stability region reaches at least 2.6 in every left-half-plane direction.
/// Step doubling alone lets the stiff high-n modes go unstable between
/// rejections, which pollutes the weighted norms.
pub const RK_STABILITY: f64 = 2.2;
/// Largest dim for which resolvent_solve defaults to the direct solve.
pub const DIRECT_SOLVE_MAX_DIM: usize = 60;
pub const CONTINUATION_SCHEDULE: [f64; 5] = [0.0, 0.5, 0.9, 0.99, 0.999];
pub const MAX_FIXED_POINT_ITERATIONS: usize = 100_000;

/// Observables recorded at one output time.
#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostics<T: Real> {
    pub trace: T,
    pub min_eigenvalue: T,
    /// V = tr(LρL†).
    pub v: T,
    /// ‖ρ‖_L.
    pub l_norm: T,
    /// ‖𝔄(ρ)‖_L.
    pub a_norm: T,
    /// tr(Qρ) for each explicit invariant, in `explicit_invariants` order.
    pub invariants: Vec<T>,
}

pub fn diagnose<T: Real>(
    model: &Lindbladian<T>,
    invariants: &[ExplicitInvariant<T>],
    rho: &ComplexMatrix<T>,
) -> Result<Diagnostics<T>> {
    let a = model.generator_action(rho).hermitian_part();
    Ok(Diagnostics {
        trace: rho.trace().re,
        min_eigenvalue: hermitian_eig(rho)?.min_eigenvalue(),
        v: model.lyapunov_raw(rho),
        l_norm: model.l_norm(rho)?,
        a_norm: model.l_norm(&a)?,
        invariants: invariants.iter().map(|q| q.expectation(rho)).collect(),
    })
}

#[derive(Clone, Debug)]
pub struct Snapshot<T: Real> {
    pub t: T,
    pub rho: DensityMatrix<T>,
}

/// Output grid, diagnostics per output time, and requested snapshots.
#[derive(Clone, Debug)]
pub struct Trajectory<T: Real> {
    pub times: Vec<T>,
    pub diagnostics: Vec<Diagnostics<T>>,
    pub snapshots: Vec<Snapshot<T>>,
    pub final_state: DensityMatrix<T>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn column(&self, f: impl Fn(&Diagnostics<T>) -> T) -> Vec<T> {
        self.diagnostics.iter().map(f).collect()
    }
}

#[derive(Clone, Debug)]
pub struct RkOptions<T: Real> {
    /// Local error target per step (Frobenius norm).
    pub tol: T,
    /// Output times are t_end·i/samples for i = 0..=samples.
    pub samples: usize,
    /// Extra output times at which the state itself is kept.
    pub snapshot_times: Vec<T>,
}

impl<T: Real> RkOptions<T> {
    pub fn new(tol: T) -> Self {
        Self {
            tol,
            samples: DEFAULT_SAMPLES,
            snapshot_times: Vec::new(),
        }
    }
}

fn rk4<T: Real>(model: &Lindbladian<T>, rho: &ComplexMatrix<T>, dt: T) -> ComplexMatrix<T> {
    let half = dt * T::lit(0.5);
    let k1 = model.generator_action(rho);
    let mut y = rho.clone();
    y.axpy(cr(half), &k1);
    let k2 = model.generator_action(&y);
    let mut y = rho.clone();
    y.axpy(cr(half), &k2);
    let k3 = model.generator_action(&y);
    let mut y = rho.clone();
    y.axpy(cr(dt), &k3);
    let k4 = model.generator_action(&y);
    let sixth = dt / T::lit(6.0);
    let mut out = rho.clone();
    out.axpy(cr(sixth), &k1);
    out.axpy(cr(sixth + sixth), &k2);
    out.axpy(cr(sixth + sixth), &k3);
    out.axpy(cr(sixth), &k4);
    out.hermitian_part()
}

/// One classical RK4 step of size dt followed by re-Hermitization. The result
/// is not re-validated.
pub fn rk_step<T: Real>(model: &Lindbladian<T>, rho: &DensityMatrix<T>, dt: T) -> DensityMatrix<T> {
    DensityMatrix::new_unchecked(rk4(model, rho.as_matrix(), dt))
}

fn check_dims<T: Real>(model: &Lindbladian<T>, rho: &DensityMatrix<T>) -> Result<()> {
    if rho.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: rho.dim(),
        });
    }
    Ok(())
}

fn check_t_end<T: Real>(t_end: T) -> Result<()> {
    if !(t_end >= T::zero()) || !t_end.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "t_end must be finite and >= 0, got {t_end}"
        )));
    }
    Ok(())
}

pub fn integrate_rk<T: Real>(
    model: &Lindbladian<T>,
    rho0: &DensityMatrix<T>,
    t_end: T,
    tol: T,
) -> Result<Trajectory<T>> {
    integrate_rk_with(model, rho0, t_end, &RkOptions::new(tol))
}

/// Adaptive RK4 with step doubling. Diagnostics are recorded on the output
/// grid and at snapshot times, which the stepper hits exactly.
pub fn integrate_rk_with<T: Real>(
    model: &Lindbladian<T>,
    rho0: &DensityMatrix<T>,
    t_end: T,
    opts: &RkOptions<T>,
) -> Result<Trajectory<T>> {
    check_dims(model, rho0)?;
    check_t_end(t_end)?;
    if !(opts.tol >= T::lit(MIN_TOL) && opts.tol <= T::lit(MAX_TOL)) {
        return Err(Error::InvalidParameter(format!(
            "tol must lie in [{MIN_TOL:e}, {MAX_TOL:e}], got {}",
            opts.tol
        )));
    }
    let samples = opts.samples.max(1);
    let mut stops: Vec<T> = (1..=samples)
        .map(|i| t_end * T::from_usize_lossy(i) / T::from_usize_lossy(samples))
        .chain(
            opts.snapshot_times
                .iter()
                .copied()
                .filter(|&s| s > T::zero() && s <= t_end),
        )
        .collect();
    stops.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    stops.dedup_by(|a, b| (*a - *b).abs() <= T::epsilon() * t_end);
    if t_end == T::zero() {
        stops.clear();
    }
    let wants_snapshot = |t: T| {
        opts.snapshot_times
            .iter()
            .any(|&s| (s - t).abs() <= T::epsilon() * t_end.max(T::one()) * T::lit(4.0))
    };

    let invariants = explicit_invariants::<T>(model.config());
    let mut traj = Trajectory {
        times: vec![T::zero()],
        diagnostics: vec![diagnose(model, &invariants, rho0.as_matrix())?],
        snapshots: Vec::new(),
        final_state: rho0.clone(),
        accepted_steps: 0,
        rejected_steps: 0,
    };
    if wants_snapshot(T::zero()) {
        traj.snapshots.push(Snapshot {
            t: T::zero(),
            rho: rho0.clone(),
        });
    }

    let tol = opts.tol;
    let mut rho = rho0.as_matrix().clone();
    let mut t = T::zero();
    let bound = model.ldag_l_norm_bound().max(T::one());
    let mut dt = T::lit(0.1) / bound;
    let dt_max = T::lit(RK_STABILITY) / bound;
    let floor = T::lit(MIN_STEP);
    let fifteen = T::lit(15.0);
    for &stop in &stops {
        while t < stop {
            let remaining = stop - t;
            let last = dt >= remaining;
            dt = dt.min(dt_max);
            let h = if last { remaining } else { dt };
            let full = rk4(model, &rho, h);
            let half_h = h * T::lit(0.5);
            let fine = rk4(model, &rk4(model, &rho, half_h), half_h);
            let err = (&fine - &full).frobenius_norm() / fifteen;
            let accepted = err <= tol;
            let factor = if err == T::zero() {
                T::lit(2.0)
            } else {
                (T::lit(0.9) * (tol / err).powf(T::lit(0.2)))
                    .max(T::lit(0.2))
                    .min(T::lit(2.0))
            };
            if accepted {
                rho = fine;
                t = if last { stop } else { t + h };
                traj.accepted_steps += 1;
                // A short final step says little about the stable step size.
                dt = if last { dt.min((h * factor).max(dt)) } else { h * factor };
            } else {
                traj.rejected_steps += 1;
                dt = h * factor;
            }
            if dt < floor {
                return Err(Error::StepUnderflow {
                    t: t.as_f64(),
                    dt: dt.as_f64(),
                });
            }
        }
        let d = diagnose(model, &invariants, &rho)?;
        if d.min_eigenvalue < -T::lit(POSITIVITY_FLOOR) {
            return Err(Error::PositivityLost {
                t: stop.as_f64(),
                min_eig: d.min_eigenvalue.as_f64(),
            });
        }
        traj.times.push(stop);
        traj.diagnostics.push(d);
        if wants_snapshot(stop) {
            traj.snapshots.push(Snapshot {
                t: stop,
                rho: DensityMatrix::new_unchecked(rho.clone()),
            });
        }
    }
    traj.final_state = DensityMatrix::new_unchecked(rho);
    Ok(traj)
}

/// ((I+λL†L)/2)ρ + ρ((I+λL†L)/2) = f + rλLρL†.
#[derive(Clone, Debug)]
pub struct ResolventProblem<T: Real> {
    pub f: ComplexMatrix<T>,
    pub lambda: T,
    pub r: T,
}

impl<T: Real> ResolventProblem<T> {
    pub fn new(f: ComplexMatrix<T>, lambda: T, r: T) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if !(r >= T::zero() && r <= T::one()) {
            return Err(Error::InvalidParameter(format!("r must lie in [0, 1], got {r}")));
        }
        let asym = f.hermitian_asymmetry();
        if asym > T::tol(crate::lindblad::HERMITIAN_TOL) {
            return Err(Error::NotHermitian {
                asymmetry: asym.as_f64(),
            });
        }
        Ok(Self { f, lambda, r })
    }

    /// ‖Aρ + ρA − f − rλLρL†‖_F with A = (I+λL†L)/2.
    pub fn residual(&self, model: &Lindbladian<T>, rho: &ComplexMatrix<T>) -> T {
        let half = T::lit(0.5);
        let mut res = rho.clone();
        res.axpy(cr(half * self.lambda), &model.ldag_l().matmul(rho));
        res.axpy(cr(half * self.lambda), &rho.matmul(model.ldag_l()));
        res -= &self.f;
        let lrl = model.right_ldag(&model.left_l(rho));
        res.axpy(cr(-self.r * self.lambda), &lrl);
        res.frobenius_norm()
    }
}

/// The maps Π and 𝔅 for a fixed λ: Π(ξ) solves Aρ + ρA = ξ with
/// A = (I+λL†L)/2, and 𝔅(ξ) = λLΠ(ξ)L†.
#[derive(Clone, Debug)]
pub struct ResolventMaps<'a, T: Real> {
    model: &'a Lindbladian<T>,
    lambda: T,
    pi: SylvesterSolver<T>,
}

impl<'a, T: Real> ResolventMaps<'a, T> {
    pub fn new(model: &'a Lindbladian<T>, lambda: T) -> Result<Self> {
        let mut a = model.ldag_l().scale_real(lambda);
        a += &ComplexMatrix::identity(model.dim());
        let pi = SylvesterSolver::new(&a.scale_real(T::lit(0.5)).hermitian_part())?;
        Ok(Self { model, lambda, pi })
    }

    pub fn pi(&self, xi: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        self.pi.solve(xi)
    }

    pub fn b(&self, xi: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let rho = self.pi(xi)?;
        Ok(self
            .model
            .right_ldag(&self.model.left_l(&rho))
            .scale_real(self.lambda))
    }
}

#[derive(Clone, Debug)]
pub struct FixedPoint<T: Real> {
    pub rho: ComplexMatrix<T>,
    pub xi: ComplexMatrix<T>,
    pub iterations: usize,
}

/// Relative a-posteriori error target of the fixed-point iteration.
const FIXED_POINT_TOL: f64 = 1e-13;

fn fixed_point<T: Real>(
    maps: &ResolventMaps<'_, T>,
    f: &ComplexMatrix<T>,
    r: T,
    start: ComplexMatrix<T>,
) -> Result<FixedPoint<T>> {
    let scale = f.frobenius_norm().max(T::min_positive_value());
    let target = T::tol(FIXED_POINT_TOL) * scale;
    let mut xi = start;
    let mut prev_step: Option<T> = None;
    let mut step = T::zero();
    for it in 1..=MAX_FIXED_POINT_ITERATIONS {
        let mut next = maps.b(&xi)?.scale_real(r);
        next += f;
        let next = next.hermitian_part();
        step = (&next - &xi).frobenius_norm();
        xi = next;
        // Geometric tail bound d·q/(1−q) with the observed ratio q.
        let done = match prev_step {
            _ if step <= target * T::lit(1e-3) => true,
            Some(p) if p > T::zero() => {
                let q = step / p;
                q < T::one() && step * q / (T::one() - q) <= target
            }
            _ => false,
        };
        if done {
            let rho = maps.pi(&xi)?.hermitian_part();
            return Ok(FixedPoint {
                rho,
                xi,
                iterations: it,
            });
        }
        prev_step = Some(step);
    }
    Err(Error::NoConvergence {
        what: "resolvent fixed-point iteration",
        iterations: MAX_FIXED_POINT_ITERATIONS,
        residual: (step / scale).as_f64(),
    })
}

/// Fixed point ξ = f + r𝔅(ξ) started from ξ = f; returns ρ = Π(ξ).
pub fn sylvester_resolvent<T: Real>(
    model: &Lindbladian<T>,
    prob: &ResolventProblem<T>,
) -> Result<ComplexMatrix<T>> {
    Ok(sylvester_resolvent_detailed(model, prob, None)?.rho)
}

/// As `sylvester_resolvent`, optionally warm-started from a previous ξ.
pub fn sylvester_resolvent_detailed<T: Real>(
    model: &Lindbladian<T>,
    prob: &ResolventProblem<T>,
    warm_start: Option<&ComplexMatrix<T>>,
) -> Result<FixedPoint<T>> {
    let maps = ResolventMaps::new(model, prob.lambda)?;
    let start = warm_start.cloned().unwrap_or_else(|| prob.f.clone());
    fixed_point(&maps, &prob.f, prob.r, start)
}

/// Solves a [`ResolventProblem`] for any r ∈ [0, 1] through the
/// column-stacked system ½(I⊗A' + A'ᵀ⊗I) − rλ conj(L)⊗L with
/// A' = I + λL†L, factored block by block.
pub fn resolvent_direct<T: Real>(
    model: &Lindbladian<T>,
    prob: &ResolventProblem<T>,
) -> Result<ComplexMatrix<T>> {
    DirectResolvent::new(model, prob.lambda, prob.r)?.solve(&prob.f)
}

/// Factorized (I − λ(r·LρL† − ½{L†L, ρ})) per invariant block of 𝔏; at r = 1
/// this is I + λ𝔄.
#[derive(Clone, Debug)]
pub struct DirectResolvent<T: Real> {
    dim: usize,
    blocks: Vec<(Vec<usize>, LuDecomposition<T>)>,
}

impl<T: Real> DirectResolvent<T> {
    pub fn new(model: &Lindbladian<T>, lambda: T, r: T) -> Result<Self> {
        let n = model.dim();
        let blocks = model.generator_blocks()?;
        let half = T::lit(0.5);
        let ltl = model.ldag_l();
        let l = model.l();
        let blocks = blocks
            .into_iter()
            .map(|b| {
                let idx = &b.indices;
                let m = ComplexMatrix::from_fn(idx.len(), |row, col| {
                    let (i, j) = (idx[row] % n, idx[row] / n);
                    let (p, q) = (idx[col] % n, idx[col] / n);
                    let mut z = l[(j, q)].conj() * l[(i, p)] * r;
                    if j == q {
                        z -= ltl[(i, p)] * half;
                    }
                    if i == p {
                        z -= ltl[(q, j)] * half;
                    }
                    let mut z = -z * lambda;
                    if row == col {
                        z += C::new(T::one(), T::zero());
                    }
                    z
                });
                Ok((b.indices, LuDecomposition::new(&m)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim: n, blocks })
    }

    pub fn solve(&self, f: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        if f.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: f.dim(),
            });
        }
        let rhs = f.vec_columns();
        let mut out = vec![C::zero(); rhs.len()];
        for (idx, lu) in &self.blocks {
            let b: Vec<C<T>> = idx.iter().map(|&i| rhs[i]).collect();
            for (&i, z) in idx.iter().zip(lu.solve(&b)) {
                out[i] = z;
            }
        }
        Ok(ComplexMatrix::from_vec_columns(self.dim, &out).hermitian_part())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResolventMethod {
    /// Direct solve of the vectorized system.
    Direct,
    /// Fixed-point continuation in r over `CONTINUATION_SCHEDULE`, then r = 1.
    Contraction,
}

impl ResolventMethod {
    pub fn default_for(dim: usize) -> Self {
        if dim <= DIRECT_SOLVE_MAX_DIM {
            Self::Direct
        } else {
            Self::Contraction
        }
    }
}

/// ρ solving ρ + λ𝔄(ρ) = f.
pub fn resolvent_solve<T: Real>(
    model: &Lindbladian<T>,
    f: &ComplexMatrix<T>,
    lambda: T,
) -> Result<ComplexMatrix<T>> {
    resolvent_solve_with(model, f, lambda, ResolventMethod::default_for(model.dim()))
}

pub fn resolvent_solve_with<T: Real>(
    model: &Lindbladian<T>,
    f: &ComplexMatrix<T>,
    lambda: T,
    method: ResolventMethod,
) -> Result<ComplexMatrix<T>> {
    let prob = ResolventProblem::new(f.clone(), lambda, T::one())?;
    match method {
        ResolventMethod::Direct => resolvent_direct(model, &prob),
        ResolventMethod::Contraction => {
            let stages = resolvent_continuation(model, f, lambda)?;
            Ok(stages.into_iter().last().expect("non-empty schedule").1.rho)
        }
    }
}

/// Warm-started fixed points over `CONTINUATION_SCHEDULE` followed by r = 1,
/// returned stage by stage.
pub fn resolvent_continuation<T: Real>(
    model: &Lindbladian<T>,
    f: &ComplexMatrix<T>,
    lambda: T,
) -> Result<Vec<(T, FixedPoint<T>)>> {
    let maps = ResolventMaps::new(model, lambda)?;
    let mut xi = f.clone();
    let mut stages = Vec::with_capacity(CONTINUATION_SCHEDULE.len() + 1);
    for r in CONTINUATION_SCHEDULE.iter().map(|&r| T::lit(r)).chain([T::one()]) {
        let fp = fixed_point(&maps, f, r, xi)?;
        xi = fp.xi.clone();
        stages.push((r, fp));
    }
    Ok(stages)
}

/// n_steps implicit steps ρ ← (I + λ𝔄)⁻¹ρ with λ = t_end/n_steps, each
/// followed by trace renormalization. Diagnostics are recorded every step.
pub fn integrate_backward_euler<T: Real>(
    model: &Lindbladian<T>,
    rho0: &DensityMatrix<T>,
    t_end: T,
    n_steps: usize,
) -> Result<Trajectory<T>> {
    check_dims(model, rho0)?;
    check_t_end(t_end)?;
    if n_steps == 0 {
        return Err(Error::InvalidParameter("n_steps must be >= 1".into()));
    }
    let invariants = explicit_invariants::<T>(model.config());
    let mut traj = Trajectory {
        times: vec![T::zero()],
        diagnostics: vec![diagnose(model, &invariants, rho0.as_matrix())?],
        snapshots: Vec::new(),
        final_state: rho0.clone(),
        accepted_steps: 0,
        rejected_steps: 0,
    };
    if t_end == T::zero() {
        return Ok(traj);
    }
    let lambda = t_end / T::from_usize_lossy(n_steps);
    let direct = match ResolventMethod::default_for(model.dim()) {
        ResolventMethod::Direct => Some(DirectResolvent::new(model, lambda, T::one())?),
        ResolventMethod::Contraction => None,
    };
    let mut rho = rho0.as_matrix().clone();
    for step in 1..=n_steps {
        let next = match &direct {
            Some(d) => d.solve(&rho)?,
            None => resolvent_solve_with(model, &rho, lambda, ResolventMethod::Contraction)?,
        };
        let tr = next.trace().re;
        rho = next.scale_real(T::one() / tr);
        let d = diagnose(model, &invariants, &rho)?;
        let t = lambda * T::from_usize_lossy(step);
        if d.min_eigenvalue < -T::lit(BE_POSITIVITY_FLOOR) {
            return Err(Error::PositivityLost {
                t: t.as_f64(),
                min_eig: d.min_eigenvalue.as_f64(),
            });
        }
        traj.times.push(t);
        traj.diagnostics.push(d);
        traj.accepted_steps += 1;
    }
    traj.final_state = DensityMatrix::new_unchecked(rho);
    Ok(traj)
}

/// tr|L X L†|, the weighted distance used in the strengthened convergence
/// bound.
pub fn weighted_distance<T: Real>(model: &Lindbladian<T>, x: &ComplexMatrix<T>) -> Result<T> {
    trace_norm(&model.right_ldag(&model.left_l(x)).hermitian_part())
}
