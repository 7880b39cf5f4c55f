//! End-to-end checks of the `parasteady` binary: exit codes, output files and
//! byte-level determinism across reruns and worker counts.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run_binary(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_parasteady"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const PPIC_RL: &str = r#"{
    "model": {"type": "rl_circuit"},
    "method": "ppic",
    "window": {"period": 0.02},
    "fine_dt": 1e-4,
    "coarse_dt": 5e-3,
    "tol": 1e-6,
    "max_iter": 50
}"#;

#[test]
fn run_ppic_writes_files_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "exp.json", PPIC_RL);
    let out = dir.path().join("out");
    let output = run_binary(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");

    let convergence = fs::read_to_string(out.join("convergence.csv")).unwrap();
    let mut lines = convergence.lines();
    assert_eq!(
        lines.next().unwrap(),
        "iteration,jump_norm,effective_steps_so_far"
    );
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    assert!(first[1].parse::<f64>().unwrap() > 0.0);

    let trajectory = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(trajectory.starts_with("time,state_0,current,source"));
    assert!(out.join("cost.csv").exists());
}

#[test]
fn clean_non_convergence_exits_two_with_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "exp.json",
        r#"{
            "model": {"type": "rl_circuit"},
            "method": "sequential",
            "window": {"period": 0.02, "count": 3},
            "fine_dt": 1e-4,
            "epsilon": 1e-13
        }"#,
    );
    let out = dir.path().join("out");
    let output = run_binary(&["run", "--config", &config, "--out", out.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(2), "{output:?}");
    assert!(out.join("convergence.csv").exists());
    assert!(out.join("trajectory.csv").exists());
}

#[test]
fn missing_model_section_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "exp.json",
        r#"{"method": "ppic", "window": {"period": 0.02}}"#,
    );
    let output = run_binary(&["run", "--config", &config]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line"), "diagnostic missing: {stderr}");
}

#[test]
fn method_override_wins() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "exp.json",
        r#"{
            "model": {"type": "rl_circuit"},
            "method": "ppic",
            "window": {"period": 0.02, "count": 60},
            "fine_dt": 1e-4,
            "coarse_dt": 5e-3,
            "tol": 1e-6,
            "epsilon": 1e-3,
            "max_iter": 50
        }"#,
    );
    let out = dir.path().join("out");
    let output = run_binary(&[
        "run",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
        "--method",
        "sequential",
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let convergence = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert!(convergence.starts_with("period,err,total_steps"));
}

#[test]
fn reruns_and_worker_counts_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "exp.json", PPIC_RL);
    let mut snapshots = Vec::new();
    for (label, workers) in [("a", "1"), ("b", "2"), ("c", "1")] {
        let out = dir.path().join(label);
        let output = run_binary(&[
            "run",
            "--config",
            &config,
            "--out",
            out.to_str().unwrap(),
            "--workers",
            workers,
        ]);
        assert_eq!(output.status.code(), Some(0));
        snapshots.push((
            fs::read(out.join("trajectory.csv")).unwrap(),
            fs::read(out.join("convergence.csv")).unwrap(),
            fs::read(out.join("cost.csv")).unwrap(),
        ));
    }
    assert!(snapshots.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn compare_reports_not_applicable_for_divergent_tpeec() {
    // The window period is incommensurate with the 50 Hz source, so the
    // half-period correction never settles and tpeec's row is marked
    // "not applicable".
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "exp.json",
        r#"{
            "model": {"type": "rl_circuit"},
            "methods": ["sequential", "tpeec"],
            "window": {"period": 0.027, "count": 60},
            "fine_dt": 1e-4,
            "epsilon": 5e-2
        }"#,
    );
    let out = dir.path().join("out");
    let output = run_binary(&[
        "compare",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let table = fs::read_to_string(out.join("comparison.csv")).unwrap();
    assert!(table.contains("tpeec,not applicable,false"), "{table}");
}

#[test]
fn compare_full_method_set_on_rl_circuit() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "exp.json",
        r#"{
            "model": {"type": "rl_circuit"},
            "methods": ["sequential", "ppic", "tpeec"],
            "window": {"period": 0.02, "count": 100},
            "fine_dt": 1e-4,
            "coarse_dt": 5e-3,
            "tol": 1e-3,
            "epsilon": 1e-3,
            "max_iter": 60
        }"#,
    );
    let out = dir.path().join("out");
    let output = run_binary(&[
        "compare",
        "--config",
        &config,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let table = fs::read_to_string(out.join("comparison.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "method,solves,converged,speedup_vs_sequential");
    assert_eq!(lines.len(), 4);
    let solves: Vec<u64> = lines[1..]
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    // PP-IC needs fewer solves than sequential stepping.
    assert!(solves[1] < solves[0], "{table}");
}
