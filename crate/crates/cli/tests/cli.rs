use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lindep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lindep")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn simulate_to(path: &Path, extra: &[&str]) {
    let mut args = vec!["simulate", "--out", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = lindep(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simulate_writes_named_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("z.csv");
    simulate_to(&csv, &["--set", "var.c=1", "--set", "length=300"]);
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x1,y1,w1");
    assert_eq!(lines.count(), 300);
}

#[test]
fn test_reports_json_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("z.csv");
    simulate_to(&csv, &["--set", "filter.order=4", "--set", "seed=3"]);
    let o = lindep(&["test", csv.to_str().unwrap(), "--trim", "20", "--null-samples", "10000"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for fam in ["chi_square", "f", "lambda_star"] {
        let p = v["verdicts"][fam]["p_value"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&p));
    }

    let gc = lindep(&[
        "test",
        csv.to_str().unwrap(),
        "--measure",
        "gc",
        "--x",
        "y1",
        "--y",
        "x1",
        "--p",
        "2",
        "--q",
        "3",
        "--trim",
        "0",
        "--detrend",
        "--bandpass",
        "0.02,0.5",
        "--tests",
        "chi2,f",
    ]);
    assert_eq!(code(&gc), 0, "{}", String::from_utf8_lossy(&gc.stderr));
    let v: serde_json::Value = serde_json::from_slice(&gc.stdout).unwrap();
    assert_eq!(v["terms"].as_array().unwrap().len(), 3);
    assert!(v["verdicts"].get("lambda_star").is_none());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let single = dir.path().join("one.csv");
    fs::write(&single, "a\n".to_string() + &"1.0\n".repeat(500)).unwrap();
    assert_eq!(code(&lindep(&["test", single.to_str().unwrap()])), 2);
    let pair = dir.path().join("pair.csv");
    simulate_to(&pair, &[]);
    assert_eq!(code(&lindep(&["test", pair.to_str().unwrap(), "--bandpass", "0.1"])), 2);
    assert_eq!(code(&lindep(&["test", pair.to_str().unwrap(), "--bandpass", "0.4,0.1"])), 2);

    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    assert_eq!(code(&lindep(&["experiment", "--set", "alpha=2", "--out", out])), 2);
    assert_eq!(code(&lindep(&["experiment", "--set", "measure=nonsense", "--out", out])), 2);
    assert_eq!(code(&lindep(&["experiment", "--set", "trials", "--out", out])), 2);
    assert_eq!(code(&lindep(&["sweep", "--set", "trials=2", "--out", out])), 2);
    assert_eq!(code(&lindep(&["frobnicate"])), 2);
}

#[test]
fn ingestion_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let nan = dir.path().join("nan.csv");
    let mut body = String::from("a,b\n");
    for i in 0..600 {
        body.push_str(&format!("{i},{}\n", if i == 10 { "NaN".to_string() } else { (i % 7).to_string() }));
    }
    fs::write(&nan, body).unwrap();
    assert_eq!(code(&lindep(&["test", nan.to_str().unwrap()])), 3);
    assert_eq!(code(&lindep(&["test", dir.path().join("missing.csv").to_str().unwrap()])), 3);

    let short = dir.path().join("short.csv");
    simulate_to(&short, &["--set", "length=300"]);
    assert_eq!(code(&lindep(&["test", short.to_str().unwrap()])), 3);
}

#[test]
fn experiment_and_sweep_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"trials": 12, "length": 256, "null_samples": 10000, "filter": {"kind": "butterworth", "order": 2}}"#,
    )
    .unwrap();
    let out = dir.path().join("exp");
    let o = lindep(&[
        "experiment",
        "-c",
        cfg.to_str().unwrap(),
        "--set",
        "seed=5",
        "--out",
        out.to_str().unwrap(),
        "--svg",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["report.json", "pvalues.csv", "fpr_curve.csv", "fpr_curve.svg"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 5);
    assert_eq!(report["config"]["filter"]["order"], 2);
    assert_eq!(fs::read_to_string(out.join("pvalues.csv")).unwrap().lines().count(), 13);
    assert_eq!(fs::read_to_string(out.join("fpr_curve.csv")).unwrap().lines().count(), 101);

    let sw = dir.path().join("sweep");
    let o = lindep(&[
        "sweep",
        "-c",
        cfg.to_str().unwrap(),
        "--variable",
        "filter_order",
        "--grid",
        "0,4",
        "--out",
        sw.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(sw.join("sweep_summary.csv")).unwrap();
    assert!(summary.starts_with("filter_order,family"));
    assert_eq!(summary.lines().count(), 1 + 2 * 3);
    assert!(sw.join("point_001_4").join("report.json").exists());
}
