//! Subcommand drivers. Each writes its outputs under `output_dir` and returns
//! a [`CommandError`] whose [`exit_code`](CommandError::exit_code) the binary
//! passes through.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::config::{ConfigError, InitialState, Integrator, RunConfig};
use super::io::{write_snapshot, write_trajectory_csv};
use super::verify::{self, VerificationReport, VerifyPlan};
use crate::error::Error;
use crate::evolve::{
    integrate_backward_euler, integrate_rk_with, resolvent_solve_with, ResolventMethod,
    ResolventProblem, RkOptions, Trajectory,
};
use crate::fock::{self, FockConfig};
use crate::invariants::{cat_eigen_check, explicit_invariants, numeric_invariants};
use crate::lindblad::{DensityMatrix, Lindbladian};
use crate::numerics::random::random_density_matrix;
use crate::numerics::{trace_distance, ComplexMatrix};
use crate::scalar::C;

/// Support of `random` initial states when none is given.
pub const DEFAULT_RANDOM_SUPPORT: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Numeric(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CommandError {
    /// 1 for configuration and I/O problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::Io { .. } => 1,
            Self::Numeric(_) => 2,
        }
    }
}

type CmdResult<T> = std::result::Result<T, CommandError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CommandError + '_ {
    move |source| CommandError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn prepare_dir(dir: &Path) -> CmdResult<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))
}

fn write_text(path: &Path, text: &str) -> CmdResult<()> {
    fs::write(path, text).map_err(io_err(path))
}

fn snapshot_to(path: &Path, cfg: &FockConfig, rho: &ComplexMatrix<f64>) -> CmdResult<()> {
    write_snapshot(path, cfg, rho).map_err(io_err(path))
}

/// Density matrix for an [`InitialState`]. Random states use `seed` and live
/// on the first `support` levels, by default min(10, dim − 2k).
pub fn build_initial_state(
    cfg: &FockConfig,
    init: &InitialState,
    seed: u64,
) -> crate::Result<DensityMatrix<f64>> {
    match *init {
        InitialState::Fock(n) => {
            if n >= cfg.dim {
                return Err(Error::InvalidParameter(format!(
                    "fock:{n} needs dim > {n}, got {}",
                    cfg.dim
                )));
            }
            Ok(DensityMatrix::fock(cfg.dim, n))
        }
        InitialState::Coherent(re, im) => {
            Ok(DensityMatrix::pure(&fock::coherent_state(cfg, C::new(re, im))?))
        }
        InitialState::Cat(ell) => Ok(DensityMatrix::pure(&fock::cat_state(cfg, ell)?)),
        InitialState::Random(support) => {
            let interior = cfg.dim.saturating_sub(2 * cfg.k).max(1);
            let support = support.unwrap_or(DEFAULT_RANDOM_SUPPORT.min(interior));
            if support == 0 || support > cfg.dim {
                return Err(Error::InvalidParameter(format!(
                    "random support {support} must lie in 1..={}",
                    cfg.dim
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            DensityMatrix::new(random_density_matrix(cfg.dim, support, &mut rng))
        }
    }
}

fn setup(cfg: &RunConfig) -> CmdResult<(FockConfig, Lindbladian<f64>, DensityMatrix<f64>)> {
    cfg.validate()?;
    let fock_cfg = cfg.fock_config()?;
    let model = Lindbladian::new(&fock_cfg)?;
    let rho0 = build_initial_state(&fock_cfg, &cfg.init, cfg.seed)?;
    prepare_dir(&cfg.output_dir)?;
    Ok((fock_cfg, model, rho0))
}

fn integrate(
    cfg: &RunConfig,
    model: &Lindbladian<f64>,
    rho0: &DensityMatrix<f64>,
) -> crate::Result<Trajectory<f64>> {
    match cfg.integrator {
        Integrator::Rk => {
            let opts = RkOptions {
                tol: cfg.tol,
                samples: cfg.samples,
                snapshot_times: cfg.snapshot_times.clone(),
            };
            integrate_rk_with(model, rho0, cfg.t_end, &opts)
        }
        Integrator::BackwardEuler => integrate_backward_euler(model, rho0, cfg.t_end, cfg.n_steps),
    }
}

/// Writes `trajectory.csv`, one `snapshot_t<T>.json` per requested time and
/// `final_state.json`.
pub fn cmd_simulate(cfg: &RunConfig) -> CmdResult<Trajectory<f64>> {
    let (fock_cfg, model, rho0) = setup(cfg)?;
    info!(
        "simulate k={} alpha={} dim={} t_end={} integrator={}",
        fock_cfg.k, fock_cfg.alpha, fock_cfg.dim, cfg.t_end, cfg.integrator
    );
    let traj = integrate(cfg, &model, &rho0)?;
    let dir = &cfg.output_dir;
    let csv = dir.join("trajectory.csv");
    write_trajectory_csv(&csv, &traj).map_err(io_err(&csv))?;
    for s in &traj.snapshots {
        snapshot_to(&dir.join(format!("snapshot_t{:.6}.json", s.t)), &fock_cfg, s.rho.as_matrix())?;
    }
    snapshot_to(&dir.join("final_state.json"), &fock_cfg, traj.final_state.as_matrix())?;
    info!(
        "{} output rows, {} accepted / {} rejected steps",
        traj.len(),
        traj.accepted_steps,
        traj.rejected_steps
    );
    Ok(traj)
}

/// Solves ρ + λ𝔄(ρ) = f with f the configured initial state; writes
/// `resolvent.json` (the solution) and `resolvent_summary.json`.
pub fn cmd_resolvent(
    cfg: &RunConfig,
    method: Option<ResolventMethod>,
) -> CmdResult<ComplexMatrix<f64>> {
    let (fock_cfg, model, f) = setup(cfg)?;
    let method = method.unwrap_or_else(|| ResolventMethod::default_for(fock_cfg.dim));
    let rho = resolvent_solve_with(&model, f.as_matrix(), cfg.lambda, method)?;
    let prob = ResolventProblem::new(f.as_matrix().clone(), cfg.lambda, 1.0)?;
    let residual = prob.residual(&model, &rho);
    let dir = &cfg.output_dir;
    snapshot_to(&dir.join("resolvent.json"), &fock_cfg, &rho)?;
    let summary = json!({
        "lambda": cfg.lambda,
        "method": format!("{method:?}").to_lowercase(),
        "residual": residual,
        "trace": rho.trace().re,
        "min_eigenvalue": crate::numerics::min_eigenvalue(&rho)?,
        "l_norm_f": model.l_norm(f.as_matrix())?,
        "l_norm_rho": model.l_norm(&rho)?,
    });
    write_text(&dir.join("resolvent_summary.json"), &pretty(&summary))?;
    Ok(rho)
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes") + "\n"
}

/// Writes `invariants.json`: the explicit conserved observables with their
/// initial expectations, the numerically computed invariant subspace, and
/// the cat eigenvalue report when α > 0.
pub fn cmd_invariants(cfg: &RunConfig) -> CmdResult<serde_json::Value> {
    let (fock_cfg, model, rho0) = setup(cfg)?;
    let explicit: Vec<_> = explicit_invariants::<f64>(&fock_cfg)
        .iter()
        .map(|q| json!({ "label": q.label(), "expectation": q.expectation(rho0.as_matrix()) }))
        .collect();
    let numeric = numeric_invariants(&model)?;
    let cats = if fock_cfg.alpha > 0.0 {
        serde_json::to_value(cat_eigen_check::<f64>(&fock_cfg)?).expect("report serializes")
    } else {
        serde_json::Value::Null
    };
    let out = json!({
        "k": fock_cfg.k,
        "alpha": fock_cfg.alpha,
        "dim": fock_cfg.dim,
        "explicit": explicit,
        "numeric": {
            "count": numeric.len(),
            "singular_values": numeric.singular_values,
            "sigma_max": numeric.sigma_max,
            "gap_ratio": numeric.gap_ratio,
            "pairing_condition": numeric.pairing_condition,
            "observable_residual": numeric.observable_residual(&model),
            "steady_residual": numeric.steady_residual(&model),
        },
        "cat_eigenvalues": cats,
    });
    write_text(&cfg.output_dir.join("invariants.json"), &pretty(&out))?;
    Ok(out)
}

/// Writes the predicted limit to `predicted.json` and a summary to
/// `prediction.json`. With `compare`, also integrates to `t_end` with RK and
/// records the trace distance between prediction and endpoint.
pub fn cmd_predict(cfg: &RunConfig, compare: bool) -> CmdResult<serde_json::Value> {
    let (fock_cfg, model, rho0) = setup(cfg)?;
    let inv = numeric_invariants(&model)?;
    let pred = inv.predict_limit(&rho0)?;
    let dir = &cfg.output_dir;
    snapshot_to(&dir.join("predicted.json"), &fock_cfg, &pred.rho)?;
    let distance = if compare {
        let opts = RkOptions {
            tol: cfg.tol,
            samples: cfg.samples,
            snapshot_times: Vec::new(),
        };
        let traj = integrate_rk_with(&model, &rho0, cfg.t_end, &opts)?;
        Some(trace_distance(&pred.rho, traj.final_state.as_matrix())?)
    } else {
        None
    };
    let out = json!({
        "trace": pred.trace,
        "min_eigenvalue": pred.min_eigenvalue,
        "invariant_count": inv.len(),
        "t_end": compare.then_some(cfg.t_end),
        "trace_distance": distance,
    });
    write_text(&dir.join("prediction.json"), &pretty(&out))?;
    Ok(out)
}

/// Runs the verification suite and writes `verification_report.json`. The
/// report is returned even when checks fail.
pub fn cmd_verify_all(plan: &VerifyPlan, output_dir: &Path) -> CmdResult<VerificationReport> {
    prepare_dir(output_dir)?;
    let report = verify::run(plan);
    write_text(&output_dir.join("verification_report.json"), &report.to_json())?;
    Ok(report)
}
