use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_conespec")).args(args).env_remove("CONESPEC_SEED").output().unwrap();
    let code = out.status.code().unwrap();
    let json = if code == 0 { serde_json::from_slice(&out.stdout).unwrap() } else { Value::Null };
    (code, json)
}

fn result(args: &[&str]) -> Value {
    let (code, v) = run(args);
    assert_eq!(code, 0, "{args:?}");
    assert!(v["warnings"].is_array());
    assert!(v["config"].is_object());
    v["result"].clone()
}

#[test]
fn radius_presets() {
    let r = result(&["radius", "--preset", "paper:T"]);
    assert!((r["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    let r = result(&["radius", "--preset", "paper:Tk", "--k", "3"]);
    assert!(r["value"].as_f64().unwrap() < 1e-6);
    let r = result(&["radius", "--map", "zero"]);
    assert_eq!(r["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn spectrum_presets() {
    let r = result(&["spectrum", "--preset", "paper:lattice", "--n", "3"]);
    assert_eq!(r["distinct_count"], 7);
    let r = result(&["spectrum", "--preset", "paper:thm55", "--cone", "square"]);
    assert_eq!(r["distinct_count"], 9);
    let r = result(&["spectrum", "--preset", "paper:psd-f", "--theta-grid", "21"]);
    let vals: Vec<f64> = r["values"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(vals.len(), 21);
    assert!(vals.iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(vals.windows(2).all(|w| (w[0] - w[1]).abs() < 0.1));
    assert_eq!(run(&["spectrum", "--preset", "paper:psd-f"]).0, 3);
}

#[test]
fn perturb_runs() {
    let csv = std::env::temp_dir().join(format!("conespec-cli-{}.csv", std::process::id()));
    let r = result(&["perturb", "--paper", "section3", "--k", "3..8", "--csv", csv.to_str().unwrap()]);
    assert_eq!(r["perturbation"]["verdict"], "upper-semicontinuous-only");
    let table = std::fs::read_to_string(&csv).unwrap();
    std::fs::remove_file(&csv).unwrap();
    assert_eq!(table.lines().count(), 7);
    assert!(table.starts_with("k,dist_lo,dist_hi"));
    let r = result(&["perturb", "--preset", "scaled-linear"]);
    assert_eq!(r["verdict"], "continuous-consistent");
    assert_eq!(run(&["perturb", "--family", "empty"]).0, 2);
}

#[test]
fn thompson_distances() {
    let r = result(&["thompson", "--x", "1,2", "--y", "2,1"]);
    assert!((r["distance"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    let r = result(&["thompson", "--x", "1,2", "--y", "1,2"]);
    assert_eq!(r["distance"].as_f64().unwrap(), 0.0);
    let r = result(&["thompson", "--x", "1,0", "--y", "0,1"]);
    assert_eq!(r["distance"], "infinity");
    assert_eq!(run(&["thompson", "--x", "1,-1", "--y", "1,1"]).0, 2);
}

#[test]
fn parts_and_checks() {
    let r = result(&["parts", "--cone", "square"]);
    assert_eq!(r["count"], 10);
    assert_eq!(r["parts"][0]["signature"], serde_json::json!([]));
    assert_eq!(run(&["parts", "--cone", "lorentz:3"]).0, 3);
    let r = result(&["check", "--preset", "paper:lattice", "--trials", "200"]);
    assert_eq!(r["passed"], true);
    let bad = r#"{"variant":"linear","matrix":[[1.0,-1.0],[0.0,1.0]]}"#;
    let r = result(&["check", "--map", bad, "--cone", "orthant:2", "--trials", "200"]);
    assert_eq!(r["passed"], false);
}

#[test]
fn seed_is_echoed_and_output_is_deterministic() {
    let (_, a) = run(&["radius", "--preset", "paper:lattice", "--samples", "8"]);
    let (_, b) = run(&["radius", "--preset", "paper:lattice", "--samples", "8"]);
    assert_eq!(a, b);
    assert_eq!(a["config"]["seed"], 42);
    let out = Command::new(env!("CARGO_BIN_EXE_conespec"))
        .args(["radius", "--map", "zero"])
        .env("CONESPEC_SEED", "9")
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 9);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["radius"]).0, 2);
    assert_eq!(run(&["radius", "--preset", "nope"]).0, 2);
    assert_eq!(run(&["radius", "--preset", "paper:T", "--bogus"]).0, 2);
}
