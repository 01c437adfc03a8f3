//! End-to-end tests of the command-line surface: exit codes, JSON reports,
//! CSV artifacts, reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_lambda-control")
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lambda-control-test-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn run_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn zero_occupancy_reports_the_benchmark_solution() {
    let dir = tmp_dir("zero");
    let out = run(&["zero-occupancy", "--output", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    let j = v["J"].as_f64().unwrap();
    assert!((j - 0.75 * std::f64::consts::PI.powi(2)).abs() < 1e-9);
    assert!(v["verification_error"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["chosen"], "case2");
    assert_eq!(v["case1"]["r_hat_sq"]["num"], 15);
    assert_eq!(v["case1"]["r_hat_sq"]["den"], 64);
    assert!(dir.join("zero_occupancy.json").exists());
    let csv = fs::read_to_string(dir.join("zero_occupancy_trajectory.csv")).unwrap();
    assert!(csv.starts_with("t,u4,u5,u6,u7,rho_1"));
    assert_eq!(csv.lines().count(), 2002);
}

#[test]
fn degenerate_final_state_is_a_validation_error() {
    let dir = tmp_dir("nzero");
    let cfg = write_config(&dir, "a = 0.6666666666666666\nb = 0.6666666666666666\nn = 0.0\n");
    let out = run(&["zero-occupancy", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("population-inversion"), "stderr: {err}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tmp_dir("unknown");
    let cfg = write_config(&dir, "gamma0 = 1.0\nh9_step_typo = 0.01\n");
    let out = run(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let cfg = write_config(&dir, "[sweep]\nh9_stepp = 0.01\n");
    let out = run(&["bounds", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_reproduce_the_box_and_flag_the_erratum() {
    let dir = tmp_dir("bounds");
    let out = run(&["bounds", "--output", dir.to_str().unwrap()]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!((v["pnorm_min"].as_f64().unwrap() - 3.4839).abs() < 1e-3);
    assert!((v["pnorm_max"].as_f64().unwrap() - 3.897).abs() < 0.01);
    assert!((v["h9_tilde_abs_max"].as_f64().unwrap() - 8128.0).abs() / 8128.0 < 6e-3);
    assert!(v["B_U"].as_f64().unwrap() > v["B_L"].as_f64().unwrap());
    assert!(v["note"].as_str().unwrap().contains("6.4692"));
    assert!(dir.join("bounds.json").exists());
}

#[test]
fn integrate_zero_seed_yields_a_constant_trajectory() {
    let dir = tmp_dir("intzero");
    let args = [
        "integrate",
        "--seed",
        "0,0,0,0",
        "--steps",
        "100",
        "--output",
        dir.to_str().unwrap(),
    ];
    let out = run(&args);
    assert!(out.status.success());
    let csv = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    // reruns are byte-identical
    let first = fs::read(dir.join("trajectory.csv")).unwrap();
    assert!(run(&args).status.success());
    assert_eq!(first, fs::read(dir.join("trajectory.csv")).unwrap());
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 101);
    // identical state in every row (only the time column changes)
    let state = |row: &str| row.splitn(2, ',').nth(1).unwrap().to_string();
    let first = state(rows[0]);
    assert!(rows.iter().all(|r| state(r) == first));
}

#[test]
fn integrate_minimum_energy_seed_reaches_the_target() {
    let dir = tmp_dir("inttf");
    let cfg = write_config(&dir, "gamma0 = 0.0\n");
    let out = run(&[
        "integrate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "1.923824745242796,0,1.923824745242796,4.442882938158366",
        "--steps",
        "100000",
        "--output",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!(v["final_error"].as_f64().unwrap() <= 1e-8);
    // last CSV row carries the vectorized target state
    let csv = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    let fields: Vec<f64> = last.split(',').map(|x| x.parse().unwrap()).collect();
    let want = [0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0, -2f64.sqrt() / 6.0, 0.0];
    for (i, w) in want.iter().enumerate() {
        assert!((fields[5 + i] - w).abs() < 1e-8, "rho_{} = {}", i + 1, fields[5 + i]);
    }
}

#[test]
fn integrate_reports_conserved_hamiltonian_under_penalty() {
    let dir = tmp_dir("intham");
    // an extremal of the gamma0 = 1 system; its Hamiltonian column must be
    // constant even though it does not hit the target
    let out = run(&[
        "integrate",
        "--seed",
        "1.9,-0.06,1.9,4.6",
        "--steps",
        "100000",
        "--output",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!(v["hamiltonian_drift"].as_f64().unwrap() <= 1e-6);
    let csv = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    let hams: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|r| r.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    let (lo, hi) = hams
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(*x), h.max(*x)));
    assert!(hi - lo <= 1e-6, "hamiltonian column spread {}", hi - lo);
}

#[test]
fn invalid_seed_is_a_validation_error() {
    let out = run(&["integrate", "--seed", "-1,0,0,0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["integrate", "--seed", "1,0,0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["integrate", "--seed", "a,b,c,d"]);
    assert_eq!(out.status.code(), Some(2));
}

fn tiny_sweep_config(threshold: &str) -> String {
    format!(
        "gamma0 = 0.0\n\
         [sweep]\n\
         h9_tilde_range = [3.141592653589793, 3.141592653589793]\n\
         h9_step = 0.01\n\
         pnorm_range = [3.847649218361091, 3.847649218361091]\n\
         pnorm_step = 0.01\n\
         theta_steps = 4\n\
         error_threshold = {threshold}\n\
         integrator_steps = 4000\n\
         verify_steps = 8000\n"
    )
}

#[test]
fn sweep_stage3_succeeds_and_is_deterministic_across_workers() {
    let dir = tmp_dir("sweep3");
    let cfg = write_config(&dir, &tiny_sweep_config("1e-12"));
    let out1 = run(&[
        "sweep", "--stage", "3",
        "--config", cfg.to_str().unwrap(),
        "--workers", "1",
        "--output", dir.join("w1").to_str().unwrap(),
    ]);
    assert!(out1.status.success(), "{}", String::from_utf8_lossy(&out1.stderr));
    let v = stdout_json(&out1);
    let best_cost = v["stage3"]["best"]["cost"].as_f64().unwrap();
    assert!((best_cost - 0.75 * std::f64::consts::PI.powi(2)).abs() < 1e-5);

    let out2 = run(&[
        "sweep", "--stage", "3",
        "--config", cfg.to_str().unwrap(),
        "--workers", "2",
        "--output", dir.join("w2").to_str().unwrap(),
    ]);
    assert!(out2.status.success());
    let c1 = fs::read(dir.join("w1/stage3_candidates.csv")).unwrap();
    let c2 = fs::read(dir.join("w2/stage3_candidates.csv")).unwrap();
    assert_eq!(c1, c2, "candidate CSV differs across worker counts");

    // reruns are byte-identical too
    let out3 = run(&[
        "sweep", "--stage", "3",
        "--config", cfg.to_str().unwrap(),
        "--workers", "2",
        "--output", dir.join("w3").to_str().unwrap(),
    ]);
    assert!(out3.status.success());
    let c3 = fs::read(dir.join("w3/stage3_candidates.csv")).unwrap();
    assert_eq!(c1, c3);
}

#[test]
fn sweep_with_unreachable_threshold_exits_3() {
    let dir = tmp_dir("sweep3fail");
    let mut body = tiny_sweep_config("1e-30");
    body = body.replace("[3.141592653589793, 3.141592653589793]", "[0.5, 0.5]");
    let cfg = write_config(&dir, &body);
    let out = run(&[
        "sweep", "--stage", "3",
        "--config", cfg.to_str().unwrap(),
        "--output", dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("loosen the threshold"), "stderr: {err}");
}

#[test]
fn workers_env_var_must_be_numeric() {
    let out = run_env(&["bounds"], &[("LAMBDA_CONTROL_WORKERS", "many")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reproduce_pipeline_smoke_test() {
    let dir = tmp_dir("repro");
    // micro configuration: one h9 value in stage 1, pinned windows with
    // coarse steps afterwards, loose threshold so stage 3 yields candidates
    let cfg = write_config(
        &dir,
        "gamma0 = 1.0\n\
         integrator_steps = 2000\n\
         [sweep]\n\
         h9_tilde_range = [3.25, 3.26]\n\
         h9_step = 0.01\n\
         pnorm_range = [3.80, 3.81]\n\
         pnorm_step = 0.01\n\
         theta_steps = 5\n\
         error_threshold = 0.05\n\
         integrator_steps = 2000\n\
         verify_steps = 4000\n",
    );
    let out = run(&[
        "reproduce-paper",
        "--config", cfg.to_str().unwrap(),
        "--output", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    for key in ["zero_occupancy", "bounds", "sweep", "integrate"] {
        assert!(v.get(key).is_some(), "missing section {key}");
    }
    assert!(dir.join("reproduction.json").exists());
    assert!(dir.join("stage1_surface.csv").exists());
    assert!(dir.join("stage2_surface.csv").exists());
    assert!(dir.join("stage3_candidates.csv").exists());
    assert!(dir.join("trajectory.csv").exists());
}
