use std::path::Path;
use std::process::{Command, Output};

use qncal::bayes_opt::read_jsonl;

fn qncal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qncal")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = qncal(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_then_optimize_on_grid() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("g.csv");
    let rec = dir.path().join("r.jsonl");
    let stdout = ok(&["simulate", "--scenario", "thermal2d", "--grid", "11x6", "--out", s(&grid)]);
    assert!(stdout.contains("66 nodes"));
    let obj = format!("grid:{}", grid.display());
    ok(&["optimize", "--objective", &obj, "--budget", "20", "--seed", "4", "--out", s(&rec)]);
    let r = read_jsonl(&rec).unwrap();
    assert_eq!(r.len(), 1);
    assert_eq!(r[0].entries.len(), 20);
    let mut xs: Vec<String> = r[0].entries.iter().map(|e| format!("{:?}", e.x)).collect();
    xs.sort();
    xs.dedup();
    assert_eq!(xs.len(), 20, "grid nodes are not revisited");
}

#[test]
fn benchmark_compare_and_gd() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("c.csv");
    let report = dir.path().join("rep.json");
    let gd = dir.path().join("gd.jsonl");
    let common = ["--objective", "sim:thermal2d", "--budget", "14", "--init", "6"];

    let mut args = vec!["benchmark", "--trials", "3", "--curve-out", s(&curve)];
    args.extend(common);
    ok(&args);
    let text = std::fs::read_to_string(&curve).unwrap();
    assert_eq!(text.lines().count(), 15);

    let mut args = vec!["compare", "--axis", "acq", "--variants", "lcb,ei", "--trials", "3", "--at-iter", "14"];
    args.extend(["--report-out", s(&report)]);
    args.extend(common);
    let stdout = ok(&args);
    assert!(stdout.contains("lcb") && stdout.contains("ei"));
    let rep: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(rep["variants"].as_array().unwrap().len(), 2);

    ok(&["gd-baseline", "--objective", "sim:thermal2d", "--budget", "9", "--out", s(&gd)]);
    assert_eq!(read_jsonl(&gd).unwrap()[0].entries.len(), 9);
}

#[test]
fn config_file_supplies_flags_and_cli_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let rec = dir.path().join("r.jsonl");
    std::fs::write(&cfg, r#"{"objective": "sim:thermal2d", "budget": 8, "init": 4, "seed": 2}"#).unwrap();
    ok(&["optimize", "--config", s(&cfg), "--budget", "6", "--out", s(&rec)]);
    let r = read_jsonl(&rec).unwrap();
    assert_eq!(r[0].entries.len(), 6);
    assert_eq!(r[0].seed, 2);
}

#[test]
fn exec_objective_with_domain() {
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("r.jsonl");
    let cmd = r#"exec:while read -r l; do echo "$l" | awk -F'[][,]' '{ printf "{\"y\":%.12g}\n", ($2-1)^2 }'; done"#;
    ok(&["optimize", "--objective", cmd, "--domain", "-2:3", "--budget", "12", "--init", "5", "--out", s(&rec)]);
    let best = read_jsonl(&rec).unwrap()[0].best();
    assert!(best < 0.05, "{best}");
}

#[test]
fn exit_codes() {
    assert_eq!(qncal(&["optimize"]).status.code(), Some(2));
    assert_eq!(qncal(&["optimize", "--objective", "sim:nowhere", "--out", "/tmp/x"]).status.code(), Some(2));
    assert_eq!(qncal(&["optimize", "--objective", "sim:sv2d", "--kernel", "cubic", "--out", "/tmp/x"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let rec = dir.path().join("r.jsonl");
    let out = qncal(&["optimize", "--objective", "exec:read l; echo garbage", "--domain", "0:1", "--out", s(&rec)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(read_jsonl(&rec).unwrap()[0].incomplete);
    assert_eq!(qncal(&["--help"]).status.code(), Some(0));
}
