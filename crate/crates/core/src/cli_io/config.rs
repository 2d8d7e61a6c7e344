//! Run configuration: defaults, flat `key=value` files, and validation.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::evolve::{MAX_TOL, MIN_TOL};
use crate::fock::FockConfig;

/// Environment variable consulted for the output directory when neither a
/// flag nor the config file sets one.
pub const OUT_ENV: &str = "KATLIND_OUT";
pub const DEFAULT_OUT: &str = "katlind-out";
/// Largest photon order accepted from user input.
pub const MAX_K: usize = 8;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("{path}:{line}: {msg}")]
    Syntax {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {msg}")]
    Value { key: String, msg: String },
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Integrator {
    #[default]
    Rk,
    BackwardEuler,
}

impl FromStr for Integrator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "rk" | "rk4" => Ok(Self::Rk),
            "backward_euler" | "be" => Ok(Self::BackwardEuler),
            other => Err(format!("expected `rk` or `backward_euler`, got `{other}`")),
        }
    }
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rk => "rk",
            Self::BackwardEuler => "backward_euler",
        })
    }
}

/// Initial state (or resolvent right-hand side) specification.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialState {
    /// `fock:N`
    Fock(usize),
    /// `coherent:RE` or `coherent:RE,IM`
    Coherent(f64, f64),
    /// `cat:L`
    Cat(usize),
    /// `random` or `random:SUPPORT`; a seeded random density matrix on the
    /// first SUPPORT levels.
    Random(Option<usize>),
}

impl Default for InitialState {
    fn default() -> Self {
        Self::Fock(0)
    }
}

impl FromStr for InitialState {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a.trim())),
            None => (s, None),
        };
        let int = |a: Option<&str>| -> Result<usize, String> {
            a.ok_or_else(|| format!("`{head}` needs an integer argument"))?
                .parse()
                .map_err(|e| format!("bad integer in `{s}`: {e}"))
        };
        match head {
            "fock" => Ok(Self::Fock(int(arg)?)),
            "cat" => Ok(Self::Cat(int(arg)?)),
            "random" => Ok(Self::Random(arg.map(|_| int(arg)).transpose()?)),
            "coherent" => {
                let arg = arg.ok_or("`coherent` needs RE[,IM]")?;
                let mut parts = arg.split(',').map(|p| p.trim().parse::<f64>());
                let re = parts
                    .next()
                    .ok_or("missing real part")?
                    .map_err(|e| format!("bad number in `{s}`: {e}"))?;
                let im = parts
                    .next()
                    .transpose()
                    .map_err(|e| format!("bad number in `{s}`: {e}"))?
                    .unwrap_or(0.0);
                Ok(Self::Coherent(re, im))
            }
            _ => Err(format!(
                "unknown state `{s}` (expected fock:N, coherent:RE[,IM], cat:L or random[:S])"
            )),
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fock(n) => write!(f, "fock:{n}"),
            Self::Coherent(re, im) => write!(f, "coherent:{re},{im}"),
            Self::Cat(l) => write!(f, "cat:{l}"),
            Self::Random(None) => write!(f, "random"),
            Self::Random(Some(s)) => write!(f, "random:{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub k: usize,
    pub alpha: f64,
    /// Truncation; `None` selects the guard-band default.
    pub dim: Option<usize>,
    pub t_end: f64,
    pub tol: f64,
    pub snapshot_times: Vec<f64>,
    pub integrator: Integrator,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Output grid intervals for RK runs.
    pub samples: usize,
    /// Backward-Euler step count.
    pub n_steps: usize,
    pub init: InitialState,
    /// Resolvent step size.
    pub lambda: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            k: 2,
            alpha: 1.5,
            dim: None,
            t_end: 8.0,
            tol: 1e-9,
            snapshot_times: Vec::new(),
            integrator: Integrator::Rk,
            seed: 0,
            output_dir: PathBuf::from(DEFAULT_OUT),
            samples: 200,
            n_steps: 100,
            init: InitialState::Fock(0),
            lambda: 0.1,
        }
    }
}

fn value_err(key: &str, msg: impl fmt::Display) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        msg: msg.to_string(),
    }
}

fn parse<V: FromStr>(key: &str, value: &str) -> Result<V, ConfigError>
where
    V::Err: fmt::Display,
{
    value.trim().parse().map_err(|e| value_err(key, e))
}

/// Comma-separated list of times.
pub fn parse_times(value: &str) -> Result<Vec<f64>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| format!("bad time `{s}`: {e}")))
        .collect()
}

impl RunConfig {
    /// Sets one key. Dashes and underscores in keys are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let norm = key.trim().to_ascii_lowercase().replace('-', "_");
        match norm.as_str() {
            "k" => self.k = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "dim" => {
                self.dim = match value.trim() {
                    "" | "auto" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "t_end" => self.t_end = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "snapshot_times" => {
                self.snapshot_times = parse_times(value).map_err(|e| value_err(key, e))?
            }
            "integrator" => self.integrator = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "out" | "output_dir" => self.output_dir = PathBuf::from(value.trim()),
            "samples" => self.samples = parse(key, value)?,
            "n_steps" => self.n_steps = parse(key, value)?,
            "init" => self.init = parse(key, value)?,
            "lambda" => self.lambda = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.trim().to_string())),
        }
        Ok(())
    }

    /// Applies a flat `key=value` text; `#` starts a comment, blank lines are
    /// skipped. Returns whether `out`/`output_dir` was set.
    pub fn apply_str(&mut self, text: &str, origin: &str) -> Result<bool, ConfigError> {
        let mut set_out = false;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                path: origin.to_string(),
                line: idx + 1,
                msg: format!("expected key=value, got `{line}`"),
            })?;
            self.set(key, value)?;
            let norm = key.trim().replace('-', "_");
            set_out |= norm == "out" || norm == "output_dir";
        }
        Ok(set_out)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<bool, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        })?;
        self.apply_str(&text, &path.display().to_string())
    }

    pub fn fock_config(&self) -> Result<FockConfig, ConfigError> {
        let dim = self
            .dim
            .unwrap_or_else(|| FockConfig::default_dim(self.k, self.alpha));
        FockConfig::with_dim(self.k, self.alpha, dim).map_err(|e| value_err("k/alpha/dim", e))
    }

    /// Checks every field against the preconditions of the numerical layer.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.k == 0 || self.k > MAX_K {
            return Err(value_err("k", format!("must lie in 1..={MAX_K}")));
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(value_err("alpha", "must be finite and >= 0"));
        }
        if let Some(dim) = self.dim {
            if dim <= self.k {
                return Err(value_err("dim", format!("must exceed k = {}", self.k)));
            }
        }
        if !self.t_end.is_finite() || self.t_end < 0.0 {
            return Err(value_err("t_end", "must be finite and >= 0"));
        }
        if !(MIN_TOL..=MAX_TOL).contains(&self.tol) {
            return Err(value_err("tol", format!("must lie in [{MIN_TOL:e}, {MAX_TOL:e}]")));
        }
        if let Some(t) = self
            .snapshot_times
            .iter()
            .find(|t| !t.is_finite() || **t < 0.0 || **t > self.t_end)
        {
            return Err(value_err(
                "snapshot_times",
                format!("{t} lies outside [0, t_end = {}]", self.t_end),
            ));
        }
        if self.samples == 0 {
            return Err(value_err("samples", "must be >= 1"));
        }
        if self.n_steps == 0 {
            return Err(value_err("n_steps", "must be >= 1"));
        }
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(value_err("lambda", "must be finite and > 0"));
        }
        let fock = self.fock_config()?;
        match self.init {
            InitialState::Fock(n) if n >= fock.dim => {
                return Err(value_err("init", format!("fock:{n} needs dim > {n}")));
            }
            InitialState::Cat(_) if self.alpha <= 0.0 => {
                return Err(value_err("init", "cat states need alpha > 0"));
            }
            InitialState::Coherent(re, im) if !(re.is_finite() && im.is_finite()) => {
                return Err(value_err("init", "coherent amplitude must be finite"));
            }
            InitialState::Random(Some(0)) => {
                return Err(value_err("init", "random support must be >= 1"));
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_file_and_comments() {
        let mut cfg = RunConfig::default();
        let text = "# run\nk = 3\nalpha=1.0 # drive\n\nt-end = 2.5\nsnapshot_times = 0.5, 1\nintegrator = backward_euler\ninit = cat:1\n";
        let set_out = cfg.apply_str(text, "test").unwrap();
        assert!(!set_out);
        assert_eq!(cfg.k, 3);
        assert_eq!(cfg.alpha, 1.0);
        assert_eq!(cfg.t_end, 2.5);
        assert_eq!(cfg.snapshot_times, vec![0.5, 1.0]);
        assert_eq!(cfg.integrator, Integrator::BackwardEuler);
        assert_eq!(cfg.init, InitialState::Cat(1));
        cfg.validate().unwrap();
    }

    #[test]
    fn reports_bad_lines() {
        let mut cfg = RunConfig::default();
        assert!(matches!(
            cfg.apply_str("k 3", "f"),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            cfg.apply_str("colour=blue", "f"),
            Err(ConfigError::UnknownKey(_))
        ));
        assert!(matches!(cfg.apply_str("k=two", "f"), Err(ConfigError::Value { .. })));
    }

    #[test]
    fn validation_rejects_out_of_range() {
        let base = RunConfig::default();
        let bad = [
            RunConfig { k: 0, ..base.clone() },
            RunConfig { alpha: -1.0, ..base.clone() },
            RunConfig { tol: 1.0, ..base.clone() },
            RunConfig { t_end: f64::NAN, ..base.clone() },
            RunConfig { dim: Some(2), ..base.clone() },
            RunConfig { snapshot_times: vec![9.0], ..base.clone() },
            RunConfig { lambda: 0.0, ..base.clone() },
            RunConfig { init: InitialState::Fock(500), ..base.clone() },
            RunConfig { alpha: 0.0, init: InitialState::Cat(0), ..base.clone() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        base.validate().unwrap();
    }

    #[test]
    fn state_specs_round_trip() {
        for s in ["fock:3", "cat:1", "random", "random:7", "coherent:1.5,-0.5"] {
            let st: InitialState = s.parse().unwrap();
            assert_eq!(st.to_string(), s);
        }
        assert!("squeezed:1".parse::<InitialState>().is_err());
        assert!("fock".parse::<InitialState>().is_err());
    }
}
