use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use levyot_cli::run;
use serde_json::Value;
use tempfile::TempDir;

const A: &str = r#"{"d":2,"drift":[1.0,0.0],"diffusion":[[1.0,0.2],[0.2,0.5]],"jumps":[{"x":[1.0,0.0],"w":0.5},{"x":[0.0,-2.0],"w":0.25}]}"#;
const B: &str = r#"{"d":2,"drift":[0.0,0.5],"diffusion":[[0.3,0.0],[0.0,0.0]],"jumps":[{"x":[-1.0,1.0],"w":1.0}]}"#;
const MU: &str = r#"{"d":2,"jumps":[{"x":[2.0,0.0],"w":1.0}]}"#;
const NU: &str = r#"{"d":2,"jumps":[{"x":[-2.0,0.0],"w":1.0}]}"#;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn levyot(args: &[&str]) -> Out {
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let argv = std::iter::once("levyot").chain(args.iter().copied());
    let code = run(argv, &mut o, &mut e);
    Out {
        code,
        stdout: String::from_utf8(o).unwrap(),
        stderr: String::from_utf8(e).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn dist_reports_parts() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (write(&dir, "a.json", A), write(&dir, "b.json", B));
    let out = levyot(&["dist", "--a", s(&a), "--b", s(&b)]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out.stdout);
    let parts: f64 = ["drift_sq", "diffusion_sq", "jump_sq"].iter().map(|k| v[k].as_f64().unwrap()).sum();
    assert!((v["total_sq"].as_f64().unwrap() - parts).abs() < 1e-12);
    assert!((v["drift_sq"].as_f64().unwrap() - 0.625).abs() < 1e-15);
}

#[test]
fn dist_of_measures_is_jump_cost_only() {
    let dir = TempDir::new().unwrap();
    let (mu, nu) = (write(&dir, "mu.json", MU), write(&dir, "nu.json", NU));
    let out = levyot(&["dist", "--a", s(&mu), "--b", s(&nu)]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v = json(&out.stdout);
    assert_eq!(v.as_object().unwrap().len(), 1);
    assert!((v["jump_sq"].as_f64().unwrap() - 4.0).abs() < 1e-12);
}

#[test]
fn certify_accepts_optimal_rejects_independent() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (write(&dir, "a.json", A), write(&dir, "b.json", B));
    let j = dir.path().join("j.json");
    for strategy in ["optimal", "independent"] {
        let out = levyot(&["couple", "--a", s(&a), "--b", s(&b), "--strategy", strategy, "--out", s(&j)]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        let cert = levyot(&["certify", "--a", s(&a), "--b", s(&b), "--coupled", s(&j)]);
        let v = json(&cert.stdout);
        assert_eq!(v["marginals"]["passed"], Value::Bool(true));
        if strategy == "optimal" {
            assert_eq!(cert.code, 0, "{}", cert.stdout);
            assert_eq!(v["passed"], Value::Bool(true));
        } else {
            assert_eq!(cert.code, 1);
            assert_eq!(v["passed"], Value::Bool(false));
        }
    }
    let direct = levyot(&["certify", "--a", s(&a), "--b", s(&b)]);
    assert_eq!(direct.code, 0, "{}", direct.stdout);
}

#[test]
fn unknown_strategy_is_bad_input() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (write(&dir, "a.json", A), write(&dir, "b.json", B));
    let out = levyot(&["couple", "--a", s(&a), "--b", s(&b), "--strategy", "greedy"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("greedy"));
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_input_exits_one() {
    let dir = TempDir::new().unwrap();
    let b = write(&dir, "b.json", B);
    for bad in [
        r#"{"d":2,"jumps":[{"x":[0.0,0.0],"w":1.0}]}"#,
        r#"{"d":2,"drift":[0.0,0.0],"diffusion":[[1.0,0.0],[0.0,-1.0]]}"#,
        r#"{"d":2,"jumps":[],"extra":1}"#,
        "not json",
    ] {
        let a = write(&dir, "a.json", bad);
        let out = levyot(&["dist", "--a", s(&a), "--b", s(&b)]);
        assert_eq!(out.code, 1, "{bad}");
        assert!(!out.stderr.is_empty());
    }
    let missing = dir.path().join("missing.json");
    assert_eq!(levyot(&["dist", "--a", s(&missing), "--b", s(&b)]).code, 1);
    assert_eq!(levyot(&["dist", "--a", s(&b)]).code, 1);
}

#[test]
fn unwritable_output_exits_two() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (write(&dir, "a.json", A), write(&dir, "b.json", B));
    let out_path = dir.path().join("no").join("such").join("dir.json");
    let out = levyot(&["dist", "--a", s(&a), "--b", s(&b), "--out", s(&out_path)]);
    assert_eq!(out.code, 2);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (write(&dir, "a.json", A), write(&dir, "b.json", B));
    let args = [
        vec!["dist", "--a", s(&a), "--b", s(&b)],
        vec!["couple", "--a", s(&a), "--b", s(&b)],
        vec!["simulate", "--a", s(&a), "--b", s(&b), "--t", "0.5,1", "--T", "1", "--paths", "300", "--seed", "9"],
    ];
    for argv in &args {
        let first = levyot(argv);
        assert_eq!(first.code, 0, "{}", first.stderr);
        assert_eq!(first.stdout, levyot(argv).stdout);
    }
}

#[test]
fn simulate_csv_layout() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (write(&dir, "a.json", A), write(&dir, "b.json", B));
    let out = levyot(&["simulate", "--a", s(&a), "--b", s(&b), "--t", "0.25,1", "--T", "2", "--paths", "500"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let lines: Vec<&str> = out.stdout.lines().collect();
    assert_eq!(lines[0], "t,estimate,std_error,predicted,bound");
    assert_eq!(lines.len(), 4);
    let growth: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(growth.len(), 5);
    assert!(growth[3].parse::<f64>().is_ok());
    let sup: Vec<&str> = lines[3].split(',').collect();
    assert_eq!(sup[3], "");
    assert!(levyot(&["simulate", "--a", s(&a), "--b", s(&b), "--t", "1", "--paths", "10"]).code == 1);
}

#[test]
fn binary_runs() {
    let dir = TempDir::new().unwrap();
    let (mu, nu) = (write(&dir, "mu.json", MU), write(&dir, "nu.json", NU));
    let out = Command::new(env!("CARGO_BIN_EXE_levyot"))
        .args(["dist", "--a", s(&mu), "--b", s(&nu)])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().ends_with("}\n"));
    let bad = Command::new(env!("CARGO_BIN_EXE_levyot")).args(["dist"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}
