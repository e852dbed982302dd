use std::path::Path;
use std::process::{Command, Output};

use orthoflow::Matrix;
use orthoflow_cli::matrix_io::write_matrix;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_orthoflow")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn csv_rows(text: &str) -> Vec<csv::StringRecord> {
    csv::Reader::from_reader(text.as_bytes()).records().map(|r| r.unwrap()).collect()
}

fn f(record: &csv::StringRecord, i: usize) -> f64 {
    record[i].parse().unwrap()
}

#[test]
fn counts_examples() {
    assert_eq!(stdout(&["counts", "--d", "6", "--s", "2"]), "|T_s|=15 W=3 scale=5\n");
    assert_eq!(stdout(&["counts", "--d", "4", "--s", "4"]), "|T_s|=1 W=1 scale=1\n");
    let json: serde_json::Value = serde_json::from_str(&stdout(&["counts", "--d", "40", "--s", "2", "--format", "json"])).unwrap();
    assert_eq!(json["partitions"], "319830986772877770815625");
}

#[test]
fn errors_are_one_line_with_exit_code_one() {
    for args in [
        &["counts", "--d", "6", "--s", "4"][..],
        &["sortflow", "--etas", "0.01,0", "--trials", "1"],
        &["optimize", "--a", "/nonexistent/a.txt"],
        &["variance", "--no-such-flag"],
        &["sortflow", "--backend", "taylor:x"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        assert_eq!(err.lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error: "));
    }
    let err = String::from_utf8(run(&["counts", "--d", "6", "--s", "4"]).stderr).unwrap();
    assert!(err.contains("s must divide d"));
}

#[test]
fn variance_matches_closed_forms() {
    let text = stdout(&["variance", "--d", "6", "--s", "2", "--sampler", "exact,uniform", "--draws", "100000", "--seed", "3"]);
    let rows = csv_rows(&text);
    assert_eq!(&rows[0][0], "exact");
    assert_eq!((f(&rows[0], 3), f(&rows[0], 4), f(&rows[0], 5)), (0.0, 0.0, 0.0));
    let (analytic, empirical) = (f(&rows[1], 3), f(&rows[1], 4));
    assert!((empirical / analytic - 1.0).abs() < 0.05, "{analytic} vs {empirical}");

    let text = stdout(&["variance", "--d", "4", "--s", "2", "--sampler", "hreg", "--h", "abs", "--draws", "100000"]);
    let row = &csv_rows(&text)[0];
    assert!((f(row, 4) / f(row, 3) - 1.0).abs() < 0.05);
    let text = stdout(&["variance", "--d", "6", "--s", "3", "--sampler", "hreg", "--h", "square", "--draws", "50000"]);
    let row = &csv_rows(&text)[0];
    assert!((f(row, 4) / f(row, 3) - 1.0).abs() < 0.05);
}

#[test]
fn sortflow_default_grid_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for path in [&a, &b] {
        stdout(&["sortflow", "--trials", "1", "--steps", "40", "--seed", "11", "--out", path.to_str().unwrap()]);
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert!(text.starts_with("integrator,backend,eta,trial,steps,epsilon,inv_fraction,diverged\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 10 * 3);
    let mut etas: Vec<f64> = rows.iter().map(|r| f(r, 2)).collect();
    etas.dedup();
    assert_eq!(etas.len(), 10);
    let backends: std::collections::BTreeSet<&str> = rows.iter().map(|r| r.get(1).unwrap()).collect();
    assert_eq!(backends.into_iter().collect::<Vec<_>>(), ["givens", "pade", "taylor:2"]);
}

#[test]
fn sortflow_json_reports_divergence_as_null() {
    let text = stdout(&[
        "sortflow", "--d", "8", "--etas", "0.15", "--backend", "taylor:1", "--trials", "1", "--steps", "3000", "--format", "json",
    ]);
    let rows: serde_json::Value = serde_json::from_str(&text).unwrap();
    let row = &rows[0];
    assert_eq!(row["diverged"], true);
    assert!(row["epsilon"].is_null());
    assert_eq!(row["inv_fraction"], 0.0);
}

#[test]
fn optimize_identity_target_converges() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    write_matrix(&a, &Matrix::identity(6)).unwrap();
    let args = [
        "optimize", "--a", a.to_str().unwrap(), "--sampler", "exact", "--schedule", "constant", "--eta", "0.2", "--iters", "400",
    ];
    let text = stdout(&args);
    assert!(text.starts_with("iter,objective,grad_norm_sq,orth_error,trials,step_seconds\n"));
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 401);
    let last = rows.last().unwrap();
    assert!((f(last, 1) - 6.0).abs() < 1e-9, "objective {}", &last[1]);
    assert!(f(last, 3) < 1e-12);
    assert_eq!(text, stdout(&args));
}

#[test]
fn optimize_is_seeded() {
    let base = ["optimize", "--d", "8", "--sampler", "hreg", "--iters", "50"];
    let a = stdout(&[&base[..], &["--seed", "4"]].concat());
    assert_eq!(a, stdout(&[&base[..], &["--seed", "4"]].concat()));
    assert_ne!(a, stdout(&[&base[..], &["--seed", "5"]].concat()));
}

fn mean_step_seconds(sampler: &str) -> f64 {
    let text = stdout(&["optimize", "--d", "64", "--sampler", sampler, "--iters", "30", "--timing", "--eta", "0.01"]);
    let rows = csv_rows(&text);
    rows[1..].iter().map(|r| f(r, 5)).sum::<f64>() / (rows.len() - 1) as f64
}

#[test]
fn stochastic_steps_are_cheaper_at_d64() {
    let stochastic = mean_step_seconds("uniform");
    let exact = mean_step_seconds("exact");
    assert!(stochastic < exact, "stochastic {stochastic} exact {exact}");
}

#[test]
fn sample_emits_estimate_json() {
    let v: serde_json::Value = serde_json::from_str(&stdout(&["sample", "--d", "6", "--sampler", "uniform", "--s", "3"])).unwrap();
    assert_eq!(v["d"], 6);
    assert_eq!(v["scale"], 2.5);
    let blocks = v["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 2);
    assert_eq!(blocks[0]["entries"].as_array().unwrap().len(), 3);

    let dir = tempfile::tempdir().unwrap();
    let omega = dir.path().join("omega.txt");
    let m = Matrix::from_fn(4, 4, |i, j| if (i, j) == (0, 3) { 2.0 } else if (i, j) == (3, 0) { -2.0 } else { 0.0 });
    write_matrix(&omega, &m).unwrap();
    let v: serde_json::Value =
        serde_json::from_str(&stdout(&["sample", "--omega", omega.to_str().unwrap(), "--sampler", "hreg"])).unwrap();
    assert_eq!(v["scale"], 1.0);
    let hit = v["blocks"].as_array().unwrap().iter().any(|b| b["vertices"] == serde_json::json!([0, 3]));
    assert!(hit);
    assert!(Path::new(&omega).exists());
}
