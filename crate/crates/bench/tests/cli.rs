use std::process::Command;

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_abcd-bench"))
}

#[test]
fn list_functions_names_every_entry() {
    let out = bench().arg("list-functions").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["S5", "SHU", "Griewank", "Sum Square", "Zakharov"] {
        assert!(text.contains(name), "{name}");
    }
    let out = bench().args(["list-functions", "--json"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 22);
}

#[test]
fn run_writes_reports_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.jsonl");
    let trace = dir.path().join("t.csv");
    let status = bench()
        .args(["run", "--function", "levy", "--dim", "6", "--algo", "abcd-full", "--reps", "2", "--seed", "3"])
        .arg("--report-out")
        .arg(&report)
        .arg("--trace-out")
        .arg(&trace)
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(&report)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[1]["seed"], 4);
    assert!(lines[0].get("trace").is_none());
    assert!(dir.path().join("t-r0.csv").exists());
    assert!(dir.path().join("t-r1.csv").exists());
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("spec.json");
    std::fs::write(&cfg, r#"{"function": "Sphere", "dim": 6, "algorithm": "direct", "repetitions": 1}"#).unwrap();
    let out = bench()
        .args(["run", "--max-evals", "7", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["evals"], 7);
    assert_eq!(v["algorithm"], "direct");
    assert_eq!(v["termination"], "eval_budget");
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| bench().args(args).output().unwrap().status.code();
    assert_eq!(code(&["run", "--function", "nope", "--dim", "2"]), Some(1));
    assert_eq!(code(&["run", "--function", "Sphere", "--dim", "6", "--m1", "9"]), Some(1));
    assert_eq!(code(&["run", "--config", "/nonexistent/spec.json"]), Some(2));
    assert_eq!(
        code(&["run", "--function", "Sphere", "--dim", "6", "--report-out", "/nonexistent/r.jsonl"]),
        Some(2)
    );

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"specs": [{"function": "Sphere", "dim": 6, "colour": 1}]}"#).unwrap();
    assert_eq!(code(&["suite", "--config", cfg.to_str().unwrap()]), Some(1));
}

#[test]
fn suite_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.json");
    std::fs::write(
        &cfg,
        r#"{"specs": [
            {"function": "Sphere", "dim": 6, "algorithm": "direct", "repetitions": 1},
            {"function": "Sphere", "dim": 6, "algorithm": "abcd_full", "repetitions": 1}
        ]}"#,
    )
    .unwrap();
    let report = dir.path().join("r.jsonl");
    let out = bench()
        .args(["suite", "--parallel", "2", "--config"])
        .arg(&cfg)
        .arg("--report-out")
        .arg(&report)
        .output()
        .unwrap();
    assert!(out.status.success());
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.contains("winning ratio"));
    assert_eq!(std::fs::read_to_string(&report).unwrap().lines().count(), 2);
}
