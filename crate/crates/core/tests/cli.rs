use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn converge_p2_has_constant_norm_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = lab(&[
        "converge", "--p", "2", "--kernel", "0,1", "--degrees", "1,2,4",
        "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&fs::read_to_string(&out).unwrap());
    let col = header.iter().position(|h| h == "phi_norm_n").unwrap();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        let v: f64 = row[col].parse().unwrap();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-12);
    }
    let d = header.iter().position(|h| h == "dist_f_hat").unwrap();
    assert!(rows.iter().all(|r| r[d].parse::<f64>().unwrap() < 1e-12));
}

#[test]
fn solve_p4_reports_closed_form_norm() {
    let o = lab(&["solve", "--p", "4", "--kernel", "0,1", "--degrees", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let doc: Value = serde_json::from_slice(&o.stdout).unwrap();
    let v = doc["rows"][0]["phi_norm_n"].as_f64().unwrap();
    assert!((v - 0.5 * 3f64.powf(0.25)).abs() < 1e-8);
    assert!((v - 0.65804).abs() < 1e-5);
    assert_eq!(doc["config"]["kind"], "solve");
    assert!(doc["metadata"]["tolerances"]["grad_tol"].is_number());
    assert!(doc["metadata"]["grid_sizes"].is_array());
    assert!(doc["metadata"]["version"].is_string());
}

#[test]
fn p_out_of_range_exits_2_with_usage() {
    let o = lab(&["solve", "--p", "1", "--kernel", "0,1", "--degrees", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("Usage"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn malformed_inputs_exit_2() {
    for args in [
        &["solve", "--p", "2", "--kernel", "0,x"][..],
        &["solve", "--p", "2", "--kernel", "0,1", "--degrees", "4,2"],
        &["perturb-functional", "--p", "2", "--kernel", "1", "--epsilons", "0.1,0.2"],
        &["converge", "--p", "2", "--kernel", "0,0"],
        &["certify", "--p", "3"],
        &["solve", "--p", "2", "--kernel", "1", "--format", "xml"],
    ] {
        assert_eq!(lab(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn row_error_fails_loudly() {
    let o = lab(&["converge", "--p", "2", "--kernel", "0,1", "--degrees", "0,1,2"]);
    assert_eq!(o.status.code(), Some(1));
    let (header, rows) = csv_rows(&String::from_utf8_lossy(&o.stdout));
    let e = header.iter().position(|h| h == "error").unwrap();
    assert!(rows[0][e].contains("no admissible point"));
    assert_eq!(rows.len(), 3);
    let report: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(report["failures"][0]["check"], "solve");
    assert_eq!(report["failures"][0]["case"]["degree"], 0);
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.json");
    let run = || {
        let o = lab(&[
            "perturb-functional", "--p", "3", "--kernel", "random:3", "--degrees", "5",
            "--seed", "7", "--epsilons", "0.1,0.01,0.001", "--format", "json",
            "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(&out).unwrap()
    };
    let first = run();
    assert!(first == run(), "outputs differ");
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"kind":"perturb-element","p":2,"kernel":"0,1","perturbation":[[1,0]],
            "degrees":[1],"epsilons":[0.1,0.01,0.001,1e-7,0]}"#,
    )
    .unwrap();
    let o = lab(&["perturb-element", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = csv_rows(&String::from_utf8_lossy(&o.stdout));
    let m = header.iter().position(|h| h == "moment_distance").unwrap();
    // f₀ = 2z and φ(2z + ε) = 1, so ψ_ε(1) = ε/(ε² + 2) and ψ_ε(z) = 1/(ε² + 2)
    for (row, eps) in rows.iter().zip([0.1f64, 0.01, 0.001, 1e-7, 0.0]) {
        let d: f64 = row[m].parse().unwrap();
        let psi0 = eps / (eps * eps + 2.0);
        let psi1 = 1.0 / (eps * eps + 2.0);
        let expected = psi0.max((psi1 - 0.5).abs());
        assert!((d - expected).abs() < 1e-12, "{eps}: {d} vs {expected}");
    }
    assert_eq!(rows.last().unwrap()[m], "0.0");

    // the file names a different experiment
    assert_eq!(lab(&["solve", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    let o = lab(&["perturb-element", "--config", cfg.to_str().unwrap(), "--p", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn timing_column_is_opt_in() {
    let base = ["certify", "--p", "3", "--kernel", "1,1", "--degrees", "2", "--format", "csv"];
    let o = lab(&base);
    let (header, _) = csv_rows(&String::from_utf8_lossy(&o.stdout));
    assert!(!header.iter().any(|h| h == "wall_time"));
    let mut with = base.to_vec();
    with.push("--timing");
    let (header, rows) = csv_rows(&String::from_utf8_lossy(&lab(&with).stdout));
    let t = header.iter().position(|h| h == "wall_time").unwrap();
    assert!(rows[0][t].parse::<f64>().unwrap() >= 0.0);
}
