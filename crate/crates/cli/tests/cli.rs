use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bihermitian"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn genus_family_writes_full_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["family", "--genus", "2", "--k", "1", "--x", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,H,F,G,dF,dG,lambda0,lambda1,lambda2,tau"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2049);
    for row in &rows {
        let fields: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(fields.len(), 10);
        assert!(fields.iter().all(|v| v.is_finite()), "{row}");
    }
    let report = json(&dir.path().join("family.json"));
    assert_eq!(report["passed"], Value::Bool(true));
    let g_end: f64 = rows[0].split(',').nth(3).unwrap().parse().unwrap();
    assert!((g_end - 0.75f64.sqrt()).abs() < 1e-12);
}

#[test]
fn cp2_family_passes_and_reports_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["family", "--cp2", "--x", "0.5", "--eps", "1", "--formats", "json"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = json(&dir.path().join("family.json"));
    let coeffs = &report["verification"]["coefficients"];
    let closed = coeffs["closed_form"].as_array().unwrap();
    let fitted = coeffs["from_profile"].as_array().unwrap();
    for (c, f) in closed.iter().zip(fitted) {
        assert!((c.as_f64().unwrap() - f.as_f64().unwrap()).abs() < 1e-6);
    }
    assert!(!dir.path().join("profile.csv").exists());
}

#[test]
fn cp2_below_eta_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["family", "--cp2", "--x", "-0.9", "--eps", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("eta") && err.contains("-0.8245"), "{err}");
    assert!(!dir.path().join("family.json").exists());
}

#[test]
fn malformed_flags_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["family", "--x", "abc"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["family", "--genus", "0", "--x", "0.5"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["family", "--x", "0.5", "--formats", "pdf"], dir.path()).status.code(), Some(2));
}

#[test]
fn svg_plots_one_per_quantity() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["family", "--genus", "1", "--k", "1", "--x", "0.3", "--formats", "svg", "--n", "256"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    for name in ["F", "G", "lambda0", "lambda1", "lambda2", "tau"] {
        let svg = fs::read_to_string(dir.path().join(format!("{name}.svg"))).unwrap();
        assert!(svg.starts_with("<svg") && svg.contains("<polyline"));
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(&cfg, "genus = 2\nk = 3\nx = 0.8\nn = 128\nformats = json\n").unwrap();
    let out = run(&["family", "--config", cfg.to_str().unwrap(), "--x", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("family.json"));
    assert_eq!(report["config"]["family"]["x"], 0.5);
    assert_eq!(report["config"]["family"]["k"], 3);
    assert_eq!(report["config"]["n_samples"], 128);
}

#[test]
fn verify_passes_and_perturbed_fails() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(&["verify", "--seed", "7"], &dir.path().join("ok"));
    assert_eq!(ok.status.code(), Some(0));
    let report = json(&dir.path().join("ok/verify.json"));
    assert!(report["agreement"]["max_relative_error"].as_f64().unwrap() < 1e-5);
    assert_eq!(report["calibration"]["passed"], Value::Bool(true));

    let bad = run(&["verify", "--seed", "7", "--perturb", "0.01"], &dir.path().join("bad"));
    assert_eq!(bad.status.code(), Some(3));
    let report = json(&dir.path().join("bad/verify.json"));
    assert_eq!(report["passed"], Value::Bool(false));
}

#[test]
fn scan_reports_torus_verdict_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["scan", "--sweep", "9", "--formats", "json,csv"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let report = json(&dir.path().join("scan.json"));
    assert_eq!(report["genus_gt1"]["found_solution"], Value::Bool(false));
    assert_eq!(report["torus"]["found_solution"], Value::Bool(false));
    assert!(report["torus"]["factor_polynomial"].is_object());
    assert_eq!(report["torus"]["factor_roots_above_one"], Value::Array(vec![]));
    assert!(report["genus_gt1"]["worst_residual"].as_f64().unwrap() < 0.0);
    assert_eq!(report["sweep"]["anti_diagonal_max"], 0.0);

    let csv = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let mut anti = 0;
    for row in csv.lines().skip(1) {
        let v: Vec<f64> = row.split(',').map(|f| f.parse().unwrap()).collect();
        if v[1] == -v[0] {
            assert_eq!(v[2], 0.0);
            anti += 1;
        }
    }
    assert_eq!(anti, 9);
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for sub in ["a", "b"] {
        let out = run(&["verify", "--seed", "11", "--cp2", "--x", "1.5"], &dir.path().join(sub));
        assert_eq!(out.status.code(), Some(0));
    }
    let a = fs::read(dir.path().join("a/verify.json")).unwrap();
    let b = fs::read(dir.path().join("b/verify.json")).unwrap();
    assert_eq!(a, b);
}
