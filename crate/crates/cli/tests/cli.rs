//! End-to-end runs of the binary: output schemas, exit codes, error
//! JSON, determinism, and the documented example values.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn vortex(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vortex"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{path:?}: {e}"));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("{path:?}: {e}"))
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(text.trim()).unwrap_or_else(|e| panic!("stderr not JSON: {e}\n{text}"))
}

#[test]
fn winfty_writes_constants_and_profile() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&["winfty", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let summary = read_json(&dir.path().join("winfty_summary.json"));
    let plus = summary["Omega_plus"].as_f64().unwrap();
    let minus = summary["Omega_minus"].as_f64().unwrap();
    assert!((plus + 0.38).abs() < 0.02, "Omega_plus = {plus}");
    assert!((minus + 17.5).abs() < 0.3, "Omega_minus = {minus}");
    assert!(summary["w0"].as_f64().unwrap() > 0.0);
    assert!(summary["residual"].as_f64().unwrap() < 1e-6);

    let profile = fs::read_to_string(dir.path().join("winfty_profile.csv")).unwrap();
    assert!(profile.starts_with("r,psi_plus,psi_minus,Omega,omega\n"));

    // stdout carries the same summary.
    let shown: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(shown, summary);
}

#[test]
fn winfty_outer_radius_leaves_the_rim_constant_stable() {
    let base = tempfile::tempdir().unwrap();
    let wide = tempfile::tempdir().unwrap();
    assert!(vortex(&["winfty", "--out", base.path().to_str().unwrap()]).status.success());
    assert!(
        vortex(&["winfty", "--rmax", "24", "--out", wide.path().to_str().unwrap()])
            .status
            .success()
    );
    let a = read_json(&base.path().join("winfty_summary.json"))["Omega_minus"]
        .as_f64()
        .unwrap();
    let b = read_json(&wide.path().join("winfty_summary.json"))["Omega_minus"]
        .as_f64()
        .unwrap();
    assert!((a - b).abs() < 0.3, "Omega_minus moved from {a} to {b}");
}

#[test]
fn solve_reports_residual_within_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&[
        "solve",
        "--alpha",
        "10",
        "--lambda",
        "0.05",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&dir.path().join("solve_summary.json"));
    assert!(summary["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(summary["alpha"].as_f64().unwrap(), 10.0);
    assert!(summary["iterations"].as_u64().unwrap() < 50);

    let contour = fs::read_to_string(dir.path().join("omega_contour.csv")).unwrap();
    assert!(contour.starts_with("x1,x2,value\n"));
    let modes = fs::read_to_string(dir.path().join("solution_modes.csv")).unwrap();
    assert!(modes.starts_with("r,mode_re_0,mode_im_0,"));
}

#[test]
fn solve_without_circulation_is_the_zero_field() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&[
        "solve",
        "--alpha",
        "0",
        "--lambda",
        "0.1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary = read_json(&dir.path().join("solve_summary.json"));
    assert_eq!(summary["residual"].as_f64().unwrap(), 0.0);
    assert_eq!(summary["norm_Y"].as_f64().unwrap(), 0.0);
    assert_eq!(summary["iterations"].as_u64().unwrap(), 1);
}

#[test]
fn solve_quadratic_expansion_check() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&[
        "solve",
        "--alpha",
        "1",
        "--lambda",
        "0.1",
        "--check",
        "lambda2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let rep = read_json(&dir.path().join("check_lambda2.json"));
    let ratio = rep["ratio"].as_f64().unwrap();
    assert!((3.5..=4.5).contains(&ratio), "ratio = {ratio}");
}

#[test]
fn evolve_translation_mode_decays_at_its_eigenvalue() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&[
        "evolve",
        "--alpha",
        "10",
        "--lambda",
        "0.05",
        "--perturb",
        "d2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_json(&dir.path().join("stability_report.json"));
    let mu = report["fitted_mu"].as_f64().unwrap();
    assert!((mu - 0.475).abs() < 0.05 * 0.475, "mu = {mu}");
    assert!(report["eigen_residual_1"].as_f64().unwrap() < 1e-5);

    let traj = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let mut lines = traj.lines();
    assert_eq!(lines.next().unwrap(), "t,norm_X,energy,mean");
    assert!(lines.count() > 100);
}

#[test]
fn spectrum_at_the_origin_finds_the_half_doublet() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&[
        "spectrum",
        "--alpha",
        "0",
        "--lambda",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let spectrum = read_json(&dir.path().join("spectrum.json"));
    let eigs = spectrum["eigenvalues"].as_array().unwrap();
    assert_eq!(eigs.len(), 6);
    for k in 0..2 {
        let re = eigs[k][0].as_f64().unwrap();
        let im = eigs[k][1].as_f64().unwrap();
        assert!((re + 0.5).abs() < 1e-3, "eig {k} = {re}");
        assert!(im.abs() < 1e-3);
    }
}

#[test]
fn sweep_certifies_the_documented_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&[
        "sweep",
        "--alphas",
        "1,10,100",
        "--lambdas",
        "0.01,0.05,0.1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_json(&dir.path().join("sweep.json"));
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 9);
    for row in rows {
        assert_eq!(row["pass"], Value::Bool(true), "row {row}");
    }
    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert!(csv.starts_with("alpha,lambda,iterations,residual,norm_Y,"));
    assert_eq!(csv.lines().count(), 10);
}

#[test]
fn identical_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let out = vortex(&[
            "solve",
            "--alpha",
            "3",
            "--lambda",
            "0.08",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    for name in ["solve_summary.json", "solution_modes.csv", "omega_contour.csv"] {
        let fa = fs::read(a.path().join(name)).unwrap();
        let fb = fs::read(b.path().join(name)).unwrap();
        assert_eq!(fa, fb, "{name} differs between identical runs");
    }
}

#[test]
fn config_file_feeds_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    fs::write(&cfg_path, r#"{"alpha": 5.0, "lambda": 0.05, "nr": 256}"#).unwrap();

    let out = vortex(&[
        "solve",
        "--config",
        cfg_path.to_str().unwrap(),
        "--alpha",
        "1",
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&dir.path().join("o/solve_summary.json"));
    // The flag wins over the file for alpha; lambda comes from the file.
    assert_eq!(summary["alpha"].as_f64().unwrap(), 1.0);
    assert_eq!(summary["lambda"].as_f64().unwrap(), 0.05);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    fs::write(&cfg_path, r#"{"alpha": 5.0, "nnodes": 99}"#).unwrap();
    let out = vortex(&[
        "solve",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["kind"], "serialization");
}

#[test]
fn invalid_resolution_exits_with_config_error() {
    let out = vortex(&["solve", "--alpha", "1", "--nr", "4", "--out", "/tmp/unused"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["kind"], "config");
    assert_eq!(err["field"], "n_r");
}

#[test]
fn unwritable_output_directory_exits_with_io_error() {
    let out = vortex(&["winfty", "--out", "/proc/1/nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["kind"], "io");
}

#[test]
fn unreachable_tolerance_exits_with_convergence_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&[
        "solve",
        "--alpha",
        "1",
        "--lambda",
        "0.1",
        "--tol",
        "1e-16",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = stderr_json(&out);
    assert_eq!(err["kind"], "convergence");
    assert!(err["iterations"].as_u64().unwrap() >= 100);
    assert!(err["history"].as_array().unwrap().len() > 10);
}

#[test]
fn underresolved_verify_fails_invariants_with_numeric_exit() {
    let dir = tempfile::tempdir().unwrap();
    let out = vortex(&[
        "verify",
        "--nr",
        "64",
        "--rmax",
        "8",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(stderr_json(&out)["kind"], "numeric");
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().any(|l| l.starts_with("FAIL")));
    assert!(text.lines().any(|l| l.starts_with("PASS")));

    let report = read_json(&dir.path().join("verify.json"));
    assert!(report.as_array().unwrap().iter().any(|c| c["pass"] == Value::Bool(false)));
}

#[test]
fn missing_required_parameter_is_a_config_error() {
    let out = vortex(&["solve", "--out", "/tmp/unused2"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_json(&out);
    assert_eq!(err["kind"], "config");
    assert_eq!(err["field"], "alpha");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = vortex(&["solve", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["kind"], "usage");
}
