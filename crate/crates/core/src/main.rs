use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use katlind::cli_io::commands::{
    cmd_invariants, cmd_predict, cmd_resolvent, cmd_simulate, cmd_verify_all, CommandError,
};
use katlind::cli_io::config::{parse_times, ConfigError, InitialState, Integrator, RunConfig, OUT_ENV};
use katlind::cli_io::verify::VerifyPlan;
use katlind::evolve::ResolventMethod;

/// Truncated Fock-space simulator for the k-photon driven-damped oscillator.
#[derive(Parser)]
#[command(name = "katlind", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the master equation and write trajectory.csv plus snapshots.
    Simulate(Common),
    /// Solve ρ + λ𝔄(ρ) = f with f the initial state.
    Resolvent {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        method: Option<Method>,
    },
    /// Conserved observables, numeric invariant subspace, cat eigenvalues.
    Invariants(Common),
    /// Predict the t → ∞ limit from the conserved quantities.
    Predict {
        #[command(flatten)]
        common: Common,
        /// Also integrate to t_end and report the trace distance.
        #[arg(long)]
        compare: bool,
    },
    /// Run the verification suite.
    VerifyAll {
        #[command(flatten)]
        common: Common,
        /// Photon orders to verify.
        #[arg(long = "ks", value_delimiter = ',', default_values_t = vec![1, 2, 3])]
        ks: Vec<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Direct,
    Contraction,
}

/// Every flag is optional so that unset flags fall through to the config
/// file, then the environment, then the defaults.
#[derive(Args)]
struct Common {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// rk or backward_euler.
    #[arg(long)]
    integrator: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (falls back to $KATLIND_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// fock:N, coherent:RE[,IM], cat:L or random[:S].
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    n_steps: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    /// Comma-separated times at which to write snapshots.
    #[arg(long)]
    snapshot_times: Option<String>,
}

fn value_err(key: &str, msg: impl ToString) -> ConfigError {
    ConfigError::Value {
        key: key.to_string(),
        msg: msg.to_string(),
    }
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut out_set = false;
        if let Some(path) = &self.config {
            out_set = cfg.apply_file(path)?;
        }
        if !out_set {
            if let Some(dir) = std::env::var_os(OUT_ENV).filter(|d| !d.is_empty()) {
                cfg.output_dir = PathBuf::from(dir);
            }
        }
        if let Some(v) = self.k {
            cfg.k = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if self.dim.is_some() {
            cfg.dim = self.dim;
        }
        if let Some(v) = self.t_end {
            cfg.t_end = v;
        }
        if let Some(v) = self.tol {
            cfg.tol = v;
        }
        if let Some(v) = &self.integrator {
            cfg.integrator = v.parse::<Integrator>().map_err(|e| value_err("integrator", e))?;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = &self.init {
            cfg.init = v.parse::<InitialState>().map_err(|e| value_err("init", e))?;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.n_steps {
            cfg.n_steps = v;
        }
        if let Some(v) = self.samples {
            cfg.samples = v;
        }
        if let Some(v) = &self.snapshot_times {
            cfg.snapshot_times = parse_times(v).map_err(|e| value_err("snapshot_times", e))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<ExitCode, CommandError> {
    match cli.command {
        Command::Simulate(common) => {
            let cfg = common.resolve()?;
            let traj = cmd_simulate(&cfg)?;
            println!(
                "wrote {} rows to {}",
                traj.len(),
                cfg.output_dir.join("trajectory.csv").display()
            );
        }
        Command::Resolvent { common, method } => {
            let cfg = common.resolve()?;
            let method = method.map(|m| match m {
                Method::Direct => ResolventMethod::Direct,
                Method::Contraction => ResolventMethod::Contraction,
            });
            cmd_resolvent(&cfg, method)?;
            println!("wrote {}", cfg.output_dir.join("resolvent.json").display());
        }
        Command::Invariants(common) => {
            let cfg = common.resolve()?;
            let out = cmd_invariants(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&out["numeric"]).expect("json"));
        }
        Command::Predict { common, compare } => {
            let cfg = common.resolve()?;
            let out = cmd_predict(&cfg, compare)?;
            println!("{}", serde_json::to_string_pretty(&out).expect("json"));
        }
        Command::VerifyAll { common, ks } => {
            let cfg = common.resolve()?;
            let plan = VerifyPlan {
                ks,
                dim: cfg.dim,
                seed: common.seed.unwrap_or(VerifyPlan::default().seed),
            };
            let report = cmd_verify_all(&plan, &cfg.output_dir)?;
            print!("{}", report.table());
            if !report.passed {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap's own exit code for usage errors is 2, which is reserved for
    // numeric failures here.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
