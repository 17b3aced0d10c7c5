//! End-to-end checks of the command-line interface: exit codes, report
//! shape, and determinism.

use std::path::Path;
use std::process::{Command, Output};

use splitlab::dense::{Matrix, Tolerances};
use splitlab::fixtures;
use splitlab::splittings::{generate_proper_splitting, write_bundle};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_splitlab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn write_single_bundle(path: &Path, a: &Matrix, u: &Matrix, v: &Matrix) {
    std::fs::write(path, write_bundle(&[a, u, v])).unwrap();
}

#[test]
fn reproduce_all_examples_exit_zero() {
    for example in ["ex-3-2", "ex-3-5", "ex-3-13", "ex-conv", "ex-pe121"] {
        let out = run(&["reproduce", example]);
        assert!(
            out.status.code() == Some(0),
            "{example} exited {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stdout)
        );
    }
}

#[test]
fn reproduce_is_deterministic() {
    let first = run(&["reproduce", "ex-3-13"]);
    let second = run(&["reproduce", "ex-3-13"]);
    assert_eq!(first.stdout, second.stdout);
    assert!(!first.stdout.is_empty());
}

#[test]
fn analyze_classifies_single_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures::rectangular_comparison();
    let path = dir.path().join("bundle.txt");
    write_single_bundle(&path, &fx.a, &fx.m, &fx.n);
    let out = run(&["analyze", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["kind"], "single");
    assert_eq!(v["single"]["weak1"], true);
    // the printed M of this instance does not share A's range, so the
    // splitting is honestly classified as not proper
    assert_eq!(v["single"]["proper"], false);
    assert!(v["spectral"]["radius"].as_f64().unwrap() > 0.9);
}

#[test]
fn analyze_writes_report_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures::rectangular_comparison();
    let path = dir.path().join("bundle.txt");
    write_single_bundle(&path, &fx.a, &fx.m, &fx.n);
    let outdir = dir.path().join("out");
    let out = run(&[
        "analyze",
        "--input",
        path.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(outdir.join("analyze.json").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outdir.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "analyze");
    assert!(manifest["inputs"][0]
        .as_str()
        .unwrap()
        .ends_with("bundle.txt"));
}

#[test]
fn solve_alpha_splitting_converges_at_expected_rate() {
    let dir = tempfile::tempdir().unwrap();
    let tol = Tolerances::default();
    let a = Matrix::new(3, 3, vec![2.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, 5.0]).unwrap();
    let s = generate_proper_splitting(&a, 2.0, &tol).unwrap();
    let path = dir.path().join("bundle.txt");
    write_single_bundle(&path, s.a(), s.u(), s.v());
    let out = run(&[
        "solve",
        "--input",
        path.to_str().unwrap(),
        "--stop-eps",
        "1e-13",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["report"]["converged"], true);
    let rate = v["report"]["rate_estimate"].as_f64().unwrap();
    assert!((rate - 0.5).abs() < 0.05, "rate {rate}");
}

#[test]
fn compare_double_scaled_theorem_passes_on_fixture_pair() {
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures::symmetric_double_pair();
    let p1 = dir.path().join("d1.txt");
    let p2 = dir.path().join("d2.txt");
    std::fs::write(&p1, write_bundle(&[&fx.a, &fx.p1, &fx.r1, &fx.s1])).unwrap();
    std::fs::write(&p2, write_bundle(&[&fx.a, &fx.p2, &fx.r2, &fx.s2])).unwrap();
    let out = run(&[
        "compare",
        "--theorem",
        "dw2-scaled",
        "--input",
        p1.to_str().unwrap(),
        "--input2",
        p2.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["verdict"]["conclusion_holds"], true);
    assert!(v["verdict"]["hypotheses"]
        .as_array()
        .unwrap()
        .iter()
        .all(|h| h["holds"] == true));
}

#[test]
fn usage_errors_exit_two() {
    // single bundle with a block variant is a usage error
    let dir = tempfile::tempdir().unwrap();
    let fx = fixtures::rectangular_comparison();
    let path = dir.path().join("bundle.txt");
    write_single_bundle(&path, &fx.a, &fx.m, &fx.n);
    let out = run(&[
        "solve",
        "--input",
        path.to_str().unwrap(),
        "--variant",
        "hat-w",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_exits_three() {
    let out = run(&["analyze", "--input", "/nonexistent/bundle.txt"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn divergent_iteration_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let n = 2;
    let a = Matrix::identity(n).scale(-1.0);
    let u = Matrix::identity(n);
    let v = Matrix::identity(n).scale(2.0);
    let path = dir.path().join("bundle.txt");
    write_single_bundle(&path, &a, &u, &v);
    let out = run(&[
        "solve",
        "--input",
        path.to_str().unwrap(),
        "--max-iter",
        "200",
    ]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn gen_then_analyze_regularized() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("prob");
    let out = run(&[
        "gen",
        "--kind",
        "fredholm-gauss",
        "--n",
        "16",
        "--kernel-width",
        "0.1",
        "--seed",
        "7",
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for name in ["A.txt", "b.txt", "x_true.txt", "manifest.json"] {
        assert!(outdir.join(name).exists(), "{name} missing");
    }
    let a_path = outdir.join("A.txt");
    let out = run(&[
        "analyze",
        "--input",
        a_path.to_str().unwrap(),
        "--lambda",
        "1e-4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["kind"], "regularized-single");
    assert!(v["spectral"]["radius"].as_f64().unwrap() >= 0.0);
}

#[test]
fn analyze_sweep_reports_all_lambdas() {
    let dir = tempfile::tempdir().unwrap();
    let a = Matrix::new(2, 2, vec![2.0, 1.0, 1.0, 2.0]).unwrap();
    let path = dir.path().join("a.txt");
    std::fs::write(&path, a.to_text()).unwrap();
    let out = run(&["analyze", "--input", path.to_str().unwrap(), "--sweep"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    let rows = v["sweep"].as_array().unwrap();
    assert_eq!(rows.len(), 11);
    let lambdas: Vec<f64> = rows.iter().map(|r| r["lambda"].as_f64().unwrap()).collect();
    assert!(lambdas.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn tol_scale_env_is_accepted() {
    let out = bin()
        .args(["reproduce", "ex-3-2"])
        .env("SPLITLAB_TOL_SCALE", "10")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0));
    let bad = bin()
        .args(["reproduce", "ex-3-2"])
        .env("SPLITLAB_TOL_SCALE", "zero")
        .output()
        .expect("binary runs");
    assert_eq!(bad.status.code(), Some(2));
}
