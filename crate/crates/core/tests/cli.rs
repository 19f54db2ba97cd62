use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tcurve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tcurve"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

#[test]
fn test_subcommand_emits_full_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("toy.csv");
    write(&csv, "t,article_id\n2.1,a\n3.4,a\n-0.5,b\n1.97,c\n");
    let report_path = dir.path().join("report.json");
    let out = tcurve(&[
        "test",
        csv.to_str().unwrap(),
        "--reps",
        "50",
        "--j",
        "5",
        "--seed",
        "3",
        "-o",
        report_path.to_str().unwrap(),
    ]);
    let v = json(&out);
    for key in [
        "statistic",
        "epsilon",
        "critical_value",
        "p_value",
        "breakdown",
        "bsd",
        "reject",
        "n",
        "m",
        "J",
        "sigma_y2",
        "L",
        "M",
        "reps",
        "seed",
        "alpha",
        "delta",
        "shift",
        "symmetrize",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["n"], 4);
    assert_eq!(v["m"], 3);
    assert_eq!(v["J"], 5);
    let saved: Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(saved, v);
    // same configuration, same bytes
    let again = tcurve(&["test", csv.to_str().unwrap(), "--reps", "50", "--j", "5", "--seed", "3"]);
    assert_eq!(again.stdout, out.stdout);
}

#[test]
fn test_subcommand_filters_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("pooled.csv");
    write(
        &csv,
        "t,article_id,method\n2.1,a,RCT\n3.4,a,IV\n-0.5,b,RCT\n1.97,c,IV\n0.3,d,RCT\n",
    );
    let v = json(&tcurve(&[
        "test",
        csv.to_str().unwrap(),
        "--filter",
        "method",
        "RCT",
        "--reps",
        "20",
        "--j",
        "5",
    ]));
    assert_eq!(v["n"], 3);
    assert_eq!(v["filter"], serde_json::json!(["method", "RCT"]));
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let out = tcurve(&["test", missing.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.csv"));

    let bad = dir.path().join("bad.csv");
    write(&bad, "t,article_id\n1.0,a\nNaN,b\n");
    let out = tcurve(&["test", bad.to_str().unwrap(), "--j", "5", "--reps", "10"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 3"));

    assert!(!tcurve(&["delta", "--nu", "2"]).status.success());
    assert!(!tcurve(&["simulate", "--selection", "publication-bias", "--q", "2"]).status.success());
}

#[test]
fn delta_subcommand() {
    let at = |nu: &str| json(&tcurve(&["delta", "--nu", nu]))["delta"].as_f64().unwrap();
    let d50 = at("50");
    assert!((d50 - 0.0022).abs() < 0.0005, "{d50}");
    assert!(at("1000000") < 1e-6);
    assert!(at("5") > d50);
}

#[test]
fn basis_info_uses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let args = [
        "--cache-dir",
        cache.to_str().unwrap(),
        "basis-info",
        "--j",
        "8",
        "--grid-points",
        "500",
    ];
    let first = tcurve(&args);
    let v = json(&first);
    assert_eq!(v["J"], 8);
    assert_eq!(v["num_columns"], 501);
    assert_eq!(std::fs::read_dir(&cache).unwrap().count(), 1);
    assert_eq!(tcurve(&args).stdout, first.stdout);
}

#[test]
fn simulate_and_power_curve_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let sample = dir.path().join("sample.csv");
    let run = || {
        tcurve(&[
            "simulate",
            "--n",
            "50",
            "--selection",
            "threshold-phack",
            "--prob",
            "0.5",
            "--seed",
            "8",
            "-o",
            sample.to_str().unwrap(),
        ])
    };
    assert!(run().status.success());
    let first = std::fs::read(&sample).unwrap();
    let echo: Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("sample.csv.json")).unwrap())
            .unwrap();
    assert_eq!(echo["seed"], 8);
    assert_eq!(echo["dgp"]["n_target"], 50);
    assert!(run().status.success());
    assert_eq!(std::fs::read(&sample).unwrap(), first);
    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().next(), Some("t,article_id"));
    assert_eq!(text.lines().count(), 51);

    let out = tcurve(&[
        "power-curve",
        "--severities",
        "0,0.5,1",
        "--sims",
        "10",
        "--n",
        "500",
        "--reps",
        "100",
        "--reuse-cv",
        "--j",
        "10",
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "severity,rejection_rate,sims,n");
    assert!(lines[3].starts_with("1,") && lines[3].ends_with(",10,500"));
}
