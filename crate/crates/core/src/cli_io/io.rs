//! Trajectory CSV and density-matrix snapshot JSON.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use serde::Deserialize;

use crate::evolve::Trajectory;
use crate::fock::FockConfig;
use crate::numerics::ComplexMatrix;
use crate::scalar::C;

/// `t,trace,min_eig,V,l_norm,a_norm,inv_0,…,inv_{n−1}`.
pub fn csv_header(n_invariants: usize) -> String {
    let mut h = String::from("t,trace,min_eig,V,l_norm,a_norm");
    for i in 0..n_invariants {
        write!(h, ",inv_{i}").expect("write to String");
    }
    h
}

/// 17 significant digits, enough to round-trip any f64.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_csv(traj: &Trajectory<f64>) -> String {
    let n_inv = traj.diagnostics.first().map_or(0, |d| d.invariants.len());
    let mut out = csv_header(n_inv);
    out.push('\n');
    for (t, d) in traj.times.iter().zip(&traj.diagnostics) {
        let mut row = [*t, d.trace, d.min_eigenvalue, d.v, d.l_norm, d.a_norm]
            .iter()
            .map(|&x| num(x))
            .collect::<Vec<_>>();
        row.extend(d.invariants.iter().map(|&x| num(x)));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory<f64>) -> io::Result<()> {
    fs::write(path, trajectory_csv(traj))
}

/// JSON snapshot {dim, k, alpha, re, im} with row-major entry arrays.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct StateSnapshot {
    pub dim: usize,
    pub k: usize,
    pub alpha: f64,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl StateSnapshot {
    pub fn new(cfg: &FockConfig, rho: &ComplexMatrix<f64>) -> Self {
        Self {
            dim: rho.dim(),
            k: cfg.k,
            alpha: cfg.alpha,
            re: rho.as_slice().iter().map(|z| z.re).collect(),
            im: rho.as_slice().iter().map(|z| z.im).collect(),
        }
    }

    pub fn matrix(&self) -> io::Result<ComplexMatrix<f64>> {
        let n = self.dim * self.dim;
        if self.re.len() != n || self.im.len() != n {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("snapshot of dim {} needs {n} entries per array", self.dim),
            ));
        }
        let data = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&re, &im)| C::new(re, im))
            .collect();
        Ok(ComplexMatrix::from_row_major(self.dim, data))
    }

    pub fn to_json(&self) -> String {
        let arr = |v: &[f64]| v.iter().map(|&x| num(x)).collect::<Vec<_>>().join(",");
        format!(
            "{{\"dim\":{},\"k\":{},\"alpha\":{},\"re\":[{}],\"im\":[{}]}}\n",
            self.dim,
            self.k,
            num(self.alpha),
            arr(&self.re),
            arr(&self.im)
        )
    }
}

pub fn write_snapshot(
    path: &Path,
    cfg: &FockConfig,
    rho: &ComplexMatrix<f64>,
) -> io::Result<()> {
    fs::write(path, StateSnapshot::new(cfg, rho).to_json())
}

pub fn read_snapshot(path: &Path) -> io::Result<StateSnapshot> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))
}
