use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elliptic-shooter"))
        .args(args)
        .env_remove("ELLIPTIC_SHOOTER_JOBS")
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn ground_power_cubic() {
    let out = run(&[
        "ground", "--family", "power", "--lambda", "1", "--p", "3", "--N", "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_of(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["command"], "ground");
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
    let r = &v["result"];
    assert!((r["d0"].as_f64().unwrap() - 4.3373876799).abs() < 1e-8);
    assert!((r["decay_rate"].as_f64().unwrap() + 1.0).abs() < 1e-3);
    assert!(r["r_delta"].as_f64().unwrap() > 0.0);
    assert_eq!(r["strict_admissibility"], "strict");
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("ground: d0 = "));
}

#[test]
fn nagumo_fails_with_witness() {
    let out = run(&["check", "--family", "nagumo", "--c", "0.6"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json_of(&out);
    let g3 = &v["result"]["verdicts"]["G3"];
    assert_eq!(g3["verdict"], "fail");
    assert!(g3["witness"]["s"].as_f64().is_some());
}

#[test]
fn dual_mnls_with_spectrum() {
    let out = run(&[
        "dual",
        "--mnls",
        "--N",
        "2",
        "--lambda",
        "1",
        "--kappa",
        "1",
        "--p",
        "2",
        "--spectrum",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = json_of(&out)["result"].clone();
    assert_eq!(r["dual_ground"]["strict_admissibility"], "strict");
    assert_eq!(r["spectrum"]["kind"], "mnls");
    assert!(r["residual_nodes"].as_f64().unwrap() < 1e-8);
    assert!(r["u0"].as_f64().unwrap() > 0.0);
}

#[test]
fn mnls_p_sweep_all_nondegenerate() {
    let out = run(&[
        "sweep",
        "--mnls",
        "--N",
        "2",
        "--lambda",
        "1",
        "--kappa",
        "1",
        "--param",
        "p",
        "--values",
        "1.5,2,2.5,3,4",
        "--jobs",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = json_of(&out)["result"]["rows"].as_array().unwrap().clone();
    let values: Vec<f64> = rows.iter().map(|r| r["value"].as_f64().unwrap()).collect();
    assert_eq!(values, vec![1.5, 2.0, 2.5, 3.0, 4.0]);
    assert!(rows.iter().all(|r| r["nondegenerate"] == true));
}

#[test]
fn empty_sweep_is_usage_error() {
    let out = run(&[
        "sweep", "--family", "power", "--p", "3", "--param", "p", "--values",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unrecognized_sweep_knob_is_usage_error() {
    let out = run(&[
        "sweep", "--family", "power", "--p", "3", "--param", "c", "--values", "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_is_deterministic_and_jobs_independent() {
    let args = [
        "sweep", "--family", "power", "--p", "3", "--param", "lambda", "--values", "1,2,4",
    ];
    let a = run(&[&args[..], &["--jobs", "1"]].concat());
    let b = run(&[&args[..], &["--jobs", "3"]].concat());
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn config_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"command": "ground", "model": {"family": "power", "params": {"lambda": 4, "p": 3}}, "N": 2}"#,
    )
    .unwrap();
    let out_path = dir.path().join("report.csv");
    let out = run(&[
        "ground",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ground: "));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    assert!(csv.lines().count() > 100);
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"N": 3, "tolerance": 1}"#).unwrap();
    let out = run(&["ground", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["ground", "--family", "power", "--p", "3", "--mesh-n", "5"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["ground", "--family", "cubic_quintic_focusing", "--c", "1.0"]);
    assert_eq!(out.status.code(), Some(2));
}
