//! Randomized properties of the numerical core. Inputs are drawn from a
//! seeded ChaCha stream so failures shrink to a reproducible seed.

use std::sync::OnceLock;

use katlind::fock::{self, FockConfig};
use katlind::invariants::{numeric_invariants, InvariantSet};
use katlind::lindblad::{DensityMatrix, Lindbladian};
use katlind::numerics::random::{random_density_matrix, random_hermitian, random_psd, random_unit_vector};
use katlind::numerics::{hermitian_eig, psd_sqrt, sylvester_solve, trace_norm, vec_norm, ComplexMatrix};
use katlind::C;
use proptest::prelude::*;
use proptest::test_runner::FileFailurePersistence;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|j| j as f64).product()
}

/// Model at an explicit truncation, bypassing the guard-band default.
fn model(k: usize, alpha: f64, dim: usize) -> Lindbladian<f64> {
    Lindbladian::new(&FockConfig { dim, k, alpha }).unwrap()
}

/// Random density matrix supported away from the truncation edge, where the
/// truncated generator agrees with the untruncated one.
fn interior_state(m: &Lindbladian<f64>, seed: u64) -> ComplexMatrix<f64> {
    let support = m.dim() - 2 * m.k();
    random_density_matrix(m.dim(), support, &mut rng(seed))
}

fn invariant_set() -> &'static InvariantSet<f64> {
    static SET: OnceLock<InvariantSet<f64>> = OnceLock::new();
    SET.get_or_init(|| numeric_invariants(&model(2, 1.0, 24)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        failure_persistence: Some(Box::new(FileFailurePersistence::Direct(
            "tests/properties.proptest-regressions",
        ))),
        ..ProptestConfig::default()
    })]

    #[test]
    fn eigendecomposition_reconstructs(dim in 1usize..14, seed: u64) {
        let a = random_hermitian::<f64, _>(dim, &mut rng(seed));
        let eig = hermitian_eig(&a).unwrap();
        let err = (&eig.reconstruct() - &a).frobenius_norm();
        prop_assert!(err <= 1e-12 * a.frobenius_norm().max(1.0), "err {err}");
        prop_assert!(eig.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn trace_norm_is_a_norm(dim in 1usize..10, s in -3.0f64..3.0, seed: u64) {
        let mut r = rng(seed);
        let a = random_hermitian::<f64, _>(dim, &mut r);
        let b = random_hermitian::<f64, _>(dim, &mut r);
        let (na, nb) = (trace_norm(&a).unwrap(), trace_norm(&b).unwrap());
        let nab = trace_norm(&(&a + &b)).unwrap();
        prop_assert!(nab <= na + nb + 1e-10);
        let ns = trace_norm(&a.scale_real(s)).unwrap();
        prop_assert!((ns - s.abs() * na).abs() <= 1e-10 * (1.0 + na));
    }

    #[test]
    fn sylvester_solution_is_hermitian(dim in 1usize..10, seed: u64) {
        let mut r = rng(seed);
        let a = &random_psd::<f64, _>(dim, &mut r) + &ComplexMatrix::identity(dim);
        let x = random_hermitian::<f64, _>(dim, &mut r);
        let rho = sylvester_solve(&a, &x).unwrap();
        let resid = (&(&a.matmul(&rho) + &rho.matmul(&a)) - &x).frobenius_norm();
        prop_assert!(resid <= 1e-10 * x.frobenius_norm().max(1.0));
        prop_assert!(rho.hermitian_asymmetry() <= 1e-12);
    }

    #[test]
    fn interior_commutator_matches_m(k in 1usize..5, alpha in 0.0f64..2.0, extra in 1usize..20) {
        let cfg = FockConfig { dim: k + extra + 1, k, alpha };
        let l = fock::lindblad_l::<f64>(&cfg);
        let comm = &l.matmul(&l.adjoint()) - &l.adjoint().matmul(&l);
        let m = fock::commutator_m_diagonal::<f64>(&cfg);
        for i in 0..cfg.dim - k {
            for j in 0..cfg.dim - k {
                let target = if i == j { m[i] } else { 0.0 };
                let scale = m[i].abs().max(m[j].abs()).max(1.0);
                prop_assert!((comm[(i, j)] - C::new(target, 0.0)).norm() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn m_dominates_k_factorial(k in 1usize..6, dim_extra in 1usize..40) {
        let cfg = FockConfig { dim: k + dim_extra, k, alpha: 1.0 };
        let kf = factorial(k);
        for (n, &mn) in fock::commutator_m_diagonal::<f64>(&cfg).iter().enumerate() {
            prop_assert!(mn >= kf);
            // The (N+1)k! estimate needs k ≥ 2; for k = 1, M is the identity.
            if k >= 2 {
                prop_assert!(mn >= kf * (n as f64 + 1.0), "n={n} M={mn}");
            }
        }
    }

    #[test]
    fn quadrature_bound(k in 1usize..4, support in 1usize..20, seed: u64) {
        let dim = support + k + 1;
        let ak = fock::lindblad_l::<f64>(&FockConfig { dim, k, alpha: 0.0 });
        let x = &ak + &ak.adjoint();
        let psi = random_unit_vector::<f64, _>(dim, support, &mut rng(seed));
        let lhs = vec_norm(&x.mul_vec(&psi)).powi(2);
        let rhs: f64 = psi.iter().enumerate().map(|(n, z)| {
            2.0 * (((n + k) as f64).powi(k as i32) + (n as f64).powi(k as i32)) * z.norm_sqr()
        }).sum();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
    }

    #[test]
    fn kernel_has_dimension_k(k in 1usize..4, alpha in 0.3f64..1.6) {
        let cfg = FockConfig::new(k, alpha).unwrap();
        let basis = fock::kernel_basis::<f64>(&cfg);
        prop_assert_eq!(basis.len(), k);
        let l = fock::lindblad_l::<f64>(&cfg);
        for v in &basis {
            prop_assert!(vec_norm(&l.mul_vec(&v.amplitudes)) <= 1e-8);
        }
    }

    #[test]
    fn lyapunov_dissipation(k in 1usize..4, alpha in 0.0f64..1.5, seed: u64) {
        let m = model(k, alpha, 8 + 3 * k);
        let rho = interior_state(&m, seed);
        let a_rho = m.apply_a(&rho).unwrap();
        let v = m.lyapunov_v(&DensityMatrix::new(rho.clone()).unwrap());
        // d/dt V = −tr(L𝔄(ρ)L†) ≤ −k!·V
        let dv = -m.right_ldag(&m.left_l(&a_rho)).trace().re;
        prop_assert!(dv <= -factorial(k) * v + 1e-8 * v.max(1.0), "dV {dv} V {v}");
    }

    #[test]
    fn weighted_dissipation_identity(k in 1usize..4, alpha in 0.0f64..1.5, seed: u64) {
        let m = model(k, alpha, 8 + 3 * k);
        let rho = interior_state(&m, seed);
        let s = m.weight();
        let lhs = s.matmul(&m.apply_a(&rho).unwrap()).matmul(s).trace().re;
        let sqrt_m = psd_sqrt(&fock::commutator_m::<f64>(m.config())).unwrap();
        let lrl = m.right_ldag(&m.left_l(&rho));
        let rhs = sqrt_m.matmul(&lrl).matmul(&sqrt_m).trace().re;
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.abs().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn l_norm_dominates_trace_norm(k in 1usize..4, alpha in 0.0f64..2.0, seed: u64) {
        let m = model(k, alpha, 6 + 2 * k);
        let x = random_hermitian::<f64, _>(m.dim(), &mut rng(seed));
        prop_assert!(m.l_norm(&x).unwrap() >= trace_norm(&x).unwrap() * (1.0 - 1e-12));
    }

    #[test]
    fn superoperator_matches_action(k in 1usize..4, alpha in 0.0f64..2.0, seed: u64) {
        let m = model(k, alpha, 3 + 2 * k);
        let x = random_hermitian::<f64, _>(m.dim(), &mut rng(seed));
        let sup = m.vectorize_generator().unwrap();
        let err = (&sup.apply(&x) - &m.generator_action(&x)).frobenius_norm();
        prop_assert!(err <= 1e-12 * m.generator_action(&x).frobenius_norm().max(1.0));
        let dual = m.adjoint_generator().unwrap();
        let err = (&dual.apply(&x) - &m.adjoint_action(&x)).frobenius_norm();
        prop_assert!(err <= 1e-12 * m.adjoint_action(&x).frobenius_norm().max(1.0));
    }

    #[test]
    fn limit_prediction_is_affine_on_states(t in 0.0f64..1.0, seed: u64) {
        let inv = invariant_set();
        let mut r = rng(seed);
        let a = random_density_matrix::<f64, _>(24, 10, &mut r);
        let b = random_density_matrix::<f64, _>(24, 10, &mut r);
        let mix = &a.scale_real(t) + &b.scale_real(1.0 - t);
        let p = |x: &ComplexMatrix<f64>| inv.predict_limit(&DensityMatrix::new(x.clone()).unwrap()).unwrap().rho;
        let expect = &p(&a).scale_real(t) + &p(&b).scale_real(1.0 - t);
        prop_assert!((&p(&mix) - &expect).frobenius_norm() <= 1e-10);
        prop_assert!((p(&mix).trace().re - 1.0).abs() <= 1e-10);
    }
}
