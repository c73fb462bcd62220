use std::fs;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn cqnls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cqnls"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn missing_dt_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    let cfg = json!({
        "scenario": "subthreshold", "n": 64, "half_width": 20.0,
        "initial": {"generator": "ground-state"}, "T": 1.0,
    });
    fs::write(&path, cfg.to_string()).unwrap();
    let out = cqnls(&["evolve", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));

    let out = cqnls(&[
        "evolve",
        "--config",
        dir.path().join("absent.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(cqnls(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn evolve_writes_artifacts_and_honours_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    let cfg = json!({
        "scenario": "subthreshold", "n": 64, "half_width": 20.0,
        "initial": {"generator": "gaussian", "a": 0.5, "sigma": 1.5},
        "dt": 0.05, "T": 20.0, "absorber": true,
    });
    fs::write(&path, cfg.to_string()).unwrap();
    let out_dir = dir.path().join("out");
    let out = cqnls(&[
        "evolve",
        "--config",
        path.to_str().unwrap(),
        "--T",
        "10",
        "--output-dir",
        out_dir.to_str().unwrap(),
        "--name",
        "short",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = stdout_json(&out);
    assert_eq!(summary["name"], "short");
    assert!(summary["passed"].as_bool().unwrap());
    assert!(out_dir.join("short.csv").exists());
    assert!(out_dir.join("short.summary.json").exists());

    let svg = dir.path().join("energy.svg");
    let out = cqnls(&[
        "plot",
        "--csv",
        out_dir.join("short.csv").to_str().unwrap(),
        "--x",
        "t",
        "--y",
        "energy,mass",
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(fs::read_to_string(&svg).unwrap().contains("<svg"));

    let out = cqnls(&[
        "plot",
        "--csv",
        out_dir.join("short.csv").to_str().unwrap(),
        "--x",
        "t",
        "--y",
        "missing",
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert_ne!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("available"));
}

#[test]
fn ground_state_commands() {
    let dir = tempfile::tempdir().unwrap();
    let field = dir.path().join("q.field");
    let out = cqnls(&[
        "ground-state",
        "--n",
        "128",
        "--half-width",
        "16",
        "--out",
        field.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert!((v["q0"].as_f64().unwrap() - 2.2062).abs() < 1e-3);
    assert!(fs::read(&field).unwrap().starts_with(b"CQNLS-FIELD v1"));

    let csv = dir.path().join("q.csv");
    let out = cqnls(&[
        "ground-state",
        "--oracle",
        "--rmax",
        "30",
        "--dr",
        "0.001",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = stdout_json(&out);
    assert!((v["q0"].as_f64().unwrap() - 2.2062).abs() < 1e-4);
    assert!(fs::read_to_string(&csv).unwrap().starts_with("r,Q\n"));

    let out = cqnls(&["ground-state", "--n", "100"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn table_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = cqnls(&[
        "inout-test",
        "--m",
        "200",
        "--rmax",
        "20",
        "--trials",
        "20",
        "--n",
        "256",
        "--output-dir",
        d,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout_json(&out)["passed"].as_bool().unwrap());

    let out = cqnls(&[
        "mismatch-scan",
        "--kind",
        "1",
        "--N",
        "4",
        "--R-list",
        "4,8,16",
        "--trials",
        "8",
        "--seed",
        "3",
        "--n",
        "256",
        "--output-dir",
        d,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = cqnls(&["mismatch-scan", "--kind", "7", "--output-dir", d]);
    assert_eq!(out.status.code(), Some(2));
}
