use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn randns(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_randns"))
        .args(args)
        .env_remove("RANDNS_OUT")
        .env_remove("RANDNS_WORKERS")
        .current_dir(dir)
        .output()
        .unwrap()
}

fn json_at(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn out_of_range_alpha_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = randns(dir.path(), &["--alpha", "0.6", "randomize"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(err["error"], "config");
    assert!(err["message"].as_str().unwrap().contains("0 < α < 0.5"));
    assert!(!dir.path().join("randns-out").exists());

    let out = randns(dir.path(), &["--dim", "3", "--alpha", "0.3", "randomize"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "alpah = 0.2\n").unwrap();
    let out = randns(dir.path(), &["--config", "run.toml", "randomize"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flags_override_environment_over_file_over_defaults() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.toml"), "m = 6\nalpha = 0.2\nseed = 5\n[randomize]\nseed = 7\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_randns"))
        .args(["--config", "run.toml", "--alpha", "0.25", "randomize"])
        .env("RANDNS_OUT", "from-env")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let art = json_at(dir.path().join("from-env/randomize.json"));
    assert_eq!(art["kind"], "randomize");
    assert_eq!(art["config"]["m"], 6);
    assert_eq!(art["config"]["seed"], 7);
    assert_eq!(art["config"]["alpha"], 0.25);
    assert_eq!(art["config"]["gamma"], -0.05);
    assert!(art["config"].get("out").is_none());
    assert!(dir.path().join("from-env/f_omega.snsf").exists());
}

#[test]
fn regression_suites_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = randns(dir.path(), &["--out", "o", "regression"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let art = json_at(dir.path().join("o/regression.json"));
    assert_eq!(art["result"]["pass"], true);
}

#[test]
fn solve_then_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["--out", "o", "-m", "8", "--horizon", "0.1", "--dt", "2.5e-4", "--time-points", "60"];
    let out = randns(dir.path(), &[&common[..], &["solve"]].concat());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let o = dir.path().join("o");
    assert!(o.join("trace.csv").exists());
    assert!(o.join("snapshots/w_000000.snsf").exists());
    let solve = json_at(o.join("solve.json"));
    assert!(solve["result"]["duhamel_residual"].as_f64().unwrap() < 1e-4);

    let out = randns(dir.path(), &[&common[..], &["check", "--no-refine"]].concat());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let check = json_at(o.join("check.json"));
    assert_eq!(check["result"]["pass"], true);
    assert!(check["result"]["sup_E"].as_f64().unwrap().is_finite());
}

#[test]
fn tail_rejects_too_few_samples() {
    let dir = tempfile::tempdir().unwrap();
    let out = randns(dir.path(), &["--out", "o", "-m", "4", "--samples", "10", "tail"]);
    assert_ne!(out.status.code(), Some(0));
    let err: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(err["message"].as_str().unwrap().contains("100"));
}
