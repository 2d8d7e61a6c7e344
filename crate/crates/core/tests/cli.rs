use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use katlind::cli_io::io::read_snapshot;

fn katlind(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_katlind"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("KATLIND_OUT")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &[&str] = &["--k", "2", "--alpha", "1", "--dim", "20", "--t-end", "0.5", "--samples", "10"];

#[test]
fn simulate_writes_stable_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate"];
    args.extend_from_slice(SMALL);
    let o = katlind(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    // k = 2 has Q^cos_0 and Q^cos_1.
    assert_eq!(lines.next().unwrap(), "t,trace,min_eig,V,l_norm,a_norm,inv_0,inv_1");
    assert_eq!(lines.count(), 11);
    let l_norm: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|r| r.split(',').nth(4).unwrap().parse().unwrap())
        .collect();
    assert!(l_norm.windows(2).all(|w| w[1] <= w[0] + 1e-7));
}

#[test]
fn same_seed_gives_identical_csv() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut args = vec!["simulate", "--init", "random", "--seed", "17"];
    args.extend_from_slice(SMALL);
    for d in [&a, &b] {
        let o = katlind(&args, d.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("trajectory.csv")).unwrap();
    assert_eq!(read(&a), read(&b));

    let c = tempfile::tempdir().unwrap();
    args[4] = "18";
    assert!(katlind(&args, c.path()).status.success());
    assert_ne!(read(&a), read(&c));
}

#[test]
fn zero_horizon_gives_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = katlind(&["simulate", "--k", "1", "--alpha", "1", "--t-end", "0"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 2);
    let fields: Vec<f64> = rows[1].split(',').map(|x| x.parse().unwrap()).collect();
    // |0⟩⟨0| with α = 1, k = 1: V = |⟨0|L|0⟩|² = α² = 1.
    assert_eq!(fields[0], 0.0);
    assert!((fields[1] - 1.0).abs() < 1e-15);
    assert!((fields[3] - 1.0).abs() < 1e-12);
}

#[test]
fn snapshots_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate", "--snapshot-times", "0.25"];
    args.extend_from_slice(SMALL);
    let o = katlind(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let snap = read_snapshot(&dir.path().join("snapshot_t0.250000.json")).unwrap();
    assert_eq!((snap.dim, snap.k, snap.alpha), (20, 2, 1.0));
    let rho = snap.matrix().unwrap();
    assert!((rho.trace().re - 1.0).abs() < 1e-9);
    let fin = read_snapshot(&dir.path().join("final_state.json")).unwrap();
    assert_eq!(fin.re.len(), 400);
}

#[test]
fn backward_euler_integrator_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["simulate", "--integrator", "backward_euler", "--n-steps", "20"];
    args.extend_from_slice(SMALL);
    let o = katlind(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for bad in [
        vec!["simulate", "--tol", "1"],
        vec!["simulate", "--k", "0"],
        vec!["simulate", "--alpha", "-1"],
        vec!["simulate", "--integrator", "euler"],
        vec!["simulate", "--init", "fock:x"],
        vec!["simulate", "--t-end", "1", "--snapshot-times", "2"],
        vec!["simulate", "--k", "2", "--alpha", "0", "--init", "cat:0"],
        vec!["simulate", "--bogus"],
    ] {
        let o = katlind(&bad, dir.path());
        assert_eq!(o.status.code(), Some(1), "{bad:?}: {}", stderr(&o));
    }
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "k = 2\nnonsense\n").unwrap();
    let o = katlind(&["simulate", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(":2:"), "{}", stderr(&o));
}

#[test]
fn numeric_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // Six levels cannot resolve the four-dimensional invariant subspace.
    let o = katlind(&["predict", "--k", "2", "--alpha", "2", "--dim", "6"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn flags_override_config_file_and_env() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "k = 1\nalpha = 0.5\nt_end = 0\n").unwrap();
    let env_out = dir.path().join("from_env");
    let o = Command::new(env!("CARGO_BIN_EXE_katlind"))
        .args(["simulate", "--config", cfg.to_str().unwrap(), "--alpha", "1.0"])
        .env("KATLIND_OUT", &env_out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let snap = read_snapshot(&env_out.join("final_state.json")).unwrap();
    assert_eq!((snap.k, snap.alpha), (1, 1.0));
}

#[test]
fn resolvent_invariants_and_predict_commands() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["--k", "2", "--alpha", "1", "--dim", "16", "--init", "random:6"];
    for (cmd, extra, file) in [
        ("resolvent", vec!["--method", "contraction"], "resolvent.json"),
        ("invariants", vec![], "invariants.json"),
        ("predict", vec!["--compare", "--t-end", "8"], "prediction.json"),
    ] {
        let mut args = vec![cmd];
        args.extend_from_slice(&base);
        args.extend(extra);
        let o = katlind(&args, dir.path());
        assert!(o.status.success(), "{cmd}: {}", stderr(&o));
        assert!(dir.path().join(file).exists(), "{file}");
    }
    let inv: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("invariants.json")).unwrap()).unwrap();
    assert_eq!(inv["numeric"]["count"], 4);
    let pred: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("prediction.json")).unwrap()).unwrap();
    assert!(pred["trace_distance"].as_f64().unwrap() < 1e-3, "{pred}");
}

#[test]
fn verify_all_negative_control_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = katlind(&["verify-all", "--ks", "2", "--dim", "6"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("verification_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["passed"], false);
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("kernel dimension k=2"));
}
