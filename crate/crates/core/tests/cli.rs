use std::path::PathBuf;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_sigma-minmax");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("SIGMA_MINMAX_WORKERS").output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn config(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "configs", name].iter().collect();
    p.to_string_lossy().into_owned()
}

#[test]
fn help_for_every_subcommand() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    for sub in ["closed-form", "roots", "eval", "certify", "net", "prove", "oracle"] {
        let out = run(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        assert!(stdout(&out).contains("Usage"), "{sub}");
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&[]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["closed-form", "abc"]).status.code(), Some(2));
    assert_eq!(run(&["closed-form", "0.4"]).status.code(), Some(2));
    assert_eq!(run(&["eval", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(run(&["certify", "no_such_certificate"]).status.code(), Some(2));
    assert_eq!(run(&["prove", "--sample", "5", "--full"]).status.code(), Some(2));
}

#[test]
fn closed_form_prints_value_first() {
    let out = run(&["closed-form", "0.8"]);
    assert_eq!(out.status.code(), Some(0));
    let first = stdout(&out).lines().next().unwrap().trim().parse::<f64>().unwrap();
    assert!((first - 0.0625).abs() < 1e-15);

    let out = run(&["closed-form", "0.7", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["zero_generation"], 0.0);
    assert_eq!(v["one_generation"], 0.0);
    assert_eq!(v["one_generation_minimizer"]["d"], 1.4);
}

#[test]
fn roots_json() {
    let out = run(&["roots", "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let pt = v.as_array().unwrap().iter().find(|r| r["name"] == "sigma_pt").unwrap();
    assert!((pt["value"].as_f64().unwrap() - 0.72655).abs() < 1e-5);
}

#[test]
fn certify_all_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("certs.json");
    let out = run(&["certify", "all", "--report", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert!(v.as_array().unwrap().iter().all(|r| r["overall"] == true));
}

#[test]
fn eval_and_oracle_on_shipped_configs() {
    let out = run(&["eval", &config("antipodal.json"), "--which", "sharp"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout(&out).lines().next().unwrap().parse::<f64>().unwrap();
    assert!((v - (0.3 / 1.4 - 1e-5)).abs() < 1e-9, "{v}");

    for name in ["antipodal.json", "triangle.json"] {
        let out = run(&["oracle", &config(name), "--json"]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stdout(&out));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["agree"], true);
    }
}

#[test]
fn net_disposes_fixture_cube() {
    let out = run(&["net", "--p1", "0,0.9974700000000061", "--p2", "0.6219400000000036,-0.280929999999997", "--dispose", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["disposed_by"], "S2(0.05)");
}

#[test]
fn prove_small_sample_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("proof.json");
    let out = Command::new(BIN)
        .args(["prove", "--sample", "8", "--quiet", "--report", report.to_str().unwrap()])
        .env("SIGMA_MINMAX_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["verdict"], "Proved");
    assert_eq!(v["selected"], 8);

    let partial = run(&["prove", "--sample", "8", "--stop-after", "2", "--quiet", "--workers", "1"]);
    assert_eq!(partial.status.code(), Some(1));
}
