use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(config: &str, dir: &Path, extra: &[&str]) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_pointint"))
        .arg("run")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join("out").join(name)).unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().unwrap()).collect()
}

#[test]
fn spectrum_of_one_centre() {
    let tmp = TempDir::new().unwrap();
    let alpha = -1.0 / (4.0 * PI);
    let cfg = format!(r#"{{"scenario": "spectrum", "points": {{"centers": [[0, 0, 0]], "strengths": [{alpha}]}}}}"#);
    let out = run(&cfg, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let kappa = column(&read(tmp.path(), "results.csv"), "kappa");
    assert_eq!(kappa.len(), 1);
    assert!((kappa[0] - 1.0).abs() < 1e-8, "{kappa:?}");
    for f in ["summary.json", "run.log", "resolved_config.json"] {
        assert!(tmp.path().join("out").join(f).exists(), "{f} missing");
    }
}

#[test]
fn identities_are_deterministic() {
    let cfg = r#"{"scenario": "identities", "identities": {"trials": 30}}"#;
    let (a, b, c) = (TempDir::new().unwrap(), TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        let out = run(cfg, d.path(), &["--seed", "42"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["results.csv", "summary.json", "run.log"] {
        assert_eq!(read(a.path(), f), read(b.path(), f), "{f} differs between runs");
    }
    run(cfg, c.path(), &["--seed", "43"]);
    assert_ne!(read(a.path(), "results.csv"), read(c.path(), "results.csv"));
}

#[test]
fn resolved_config_reproduces_the_run() {
    let tmp = TempDir::new().unwrap();
    let out = run(r#"{"scenario": "identities", "identities": {"trials": 5}}"#, tmp.path(), &["--seed", "9"]);
    assert_eq!(out.status.code(), Some(0));
    let resolved = read(tmp.path(), "resolved_config.json");
    assert!(resolved.contains("\"seed\": 9"), "{resolved}");
    let again = TempDir::new().unwrap();
    let out = run(&resolved, again.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read(tmp.path(), "results.csv"), read(again.path(), "results.csv"));
}

#[test]
fn unknown_field_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let out = run("{\n  \"scenario\": \"spectrum\",\n  \"spectrum\": {\"kapa_max\": 4}\n}\n", tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("spectrum.kapa_max") && err.contains("line 3"), "{err}");
}

#[test]
fn malformed_json_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let out = run("{\"scenario\": \"spectrum\",\n \"seed\": }", tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn invalid_values_are_config_errors() {
    let tmp = TempDir::new().unwrap();
    let out = run(r#"{"scenario": "scaling-sweep", "sweep": {"epsilons": [0.2, -0.1, 0.05]}}"#, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep.epsilons"));
    let out = run(r#"{"scenario": "threshold", "threshold": {"potential": "well(1)"}}"#, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("threshold.potential"));
}

#[test]
fn numerical_failure_exits_one_with_the_library_message() {
    let tmp = TempDir::new().unwrap();
    let cfg = r#"{"scenario": "threshold", "threshold": {"potential": "well(-1,1)", "tune_critical": true}}"#;
    let out = run(cfg, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("precondition violated: critical depth needs an attractive potential"), "{err}");
    assert!(read(tmp.path(), "run.log").contains("critical depth"));
}

#[test]
fn failed_check_exits_one() {
    let tmp = TempDir::new().unwrap();
    let cfg = r#"{"scenario": "spectrum", "spectrum": {"expected_kappa": [1.5]}}"#;
    let out = run(cfg, tmp.path(), &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(read(tmp.path(), "summary.json").contains("\"passed\": false"));
}

#[test]
fn default_sweep_converges() {
    let tmp = TempDir::new().unwrap();
    let out = run(r#"{"scenario": "scaling-sweep"}"#, tmp.path(), &["--threads", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(tmp.path(), "results.csv");
    assert_eq!(csv.lines().next().unwrap(), "epsilon,wave_err,resolvent_err,min_sv,seconds");
    let eps = column(&csv, "epsilon");
    assert_eq!(eps, vec![0.4, 0.2, 0.1, 0.05]);
    for name in ["wave_err", "resolvent_err"] {
        let e = column(&csv, name);
        assert!(e.windows(2).all(|w| w[1] < w[0]), "{name}: {e:?}");
    }
    assert!(read(tmp.path(), "summary.json").contains("\"trend\": \"decreasing\""));
    let plot = read(tmp.path(), "plot.csv");
    assert_eq!(plot.lines().next().unwrap(), "series,x,y");
}

#[test]
fn gamma_scan_of_random_configurations() {
    let tmp = TempDir::new().unwrap();
    let cfg = r#"{"scenario": "gamma-scan", "gamma_scan": {"nodes": 200, "random": {"count": 5}}}"#;
    let out = run(cfg, tmp.path(), &["--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mins = column(&read(tmp.path(), "results.csv"), "minimum");
    assert_eq!(mins.len(), 5);
    assert!(mins.iter().all(|m| *m > 0.0));
}
