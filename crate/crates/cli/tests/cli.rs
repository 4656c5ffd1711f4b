use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &[&str] = &[
    "--set",
    "trace.source=synthetic",
    "--set",
    "synth.days=2",
    "--set",
    "synth.base_rate=1500",
    "--set",
    "synth.amplitude=1200",
    "--set",
    "warmup_minutes=1440",
    "--set",
    "season=24",
];

fn profitscale(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_profitscale"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = profitscale(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    serde_json::from_str(&ok(&all)).expect("valid JSON on stdout")
}

fn keys(v: &Value) -> Vec<&str> {
    let mut k: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    k.sort_unstable();
    k
}

fn simulate(dir: &Path, extra: &[&str]) -> String {
    let mut args = vec!["--out-dir", dir.to_str().unwrap(), "simulate"];
    args.extend_from_slice(extra);
    ok(&args)
}

#[test]
fn blocking_reference_value() {
    let v = json(&["blocking", "--n", "10", "--rho", "8"]);
    assert!((v["blocking"].as_f64().unwrap() - 0.12166).abs() < 1e-5);
    assert_eq!(
        keys(&v),
        ["blocking", "ca2", "eta", "n", "rho", "service", "z"]
    );
    let text = ok(&["blocking", "--n", "10", "--rho", "8"]);
    assert!(text.contains("0.12166"));
}

#[test]
fn blocking_without_servers_loses_everything() {
    let v = json(&["blocking", "--n", "0", "--rho", "3"]);
    assert_eq!(v["blocking"].as_f64().unwrap(), 1.0);
}

#[test]
fn blocking_bursty_arrivals_raise_blocking() {
    let poisson = json(&["blocking", "--n", "10", "--rho", "8"])["blocking"]
        .as_f64()
        .unwrap();
    let v = json(&["blocking", "--n", "10", "--rho", "8", "--ca2", "2"]);
    assert_eq!(v["z"].as_f64().unwrap(), 1.5);
    assert!(v["blocking"].as_f64().unwrap() > poisson);
}

#[test]
fn decide_reports_qed_constants() {
    let v = json(&[
        "decide",
        "--policy",
        "qed",
        "--lambda",
        "480",
        "--n-current",
        "17",
    ]);
    assert!((v["alpha"].as_f64().unwrap() - 0.09722).abs() < 1e-4);
    assert!((v["z_alpha"].as_f64().unwrap() - 1.29754).abs() < 1e-4);
    for k in [
        "policy",
        "n_current",
        "n_next",
        "n_plus",
        "n_minus",
        "predicted_profit",
        "predicted_blocking",
    ] {
        assert!(v.get(k).is_some(), "missing {k}");
    }
}

#[test]
fn decide_optimal_matches_exhaustive_scan() {
    let v = json(&[
        "decide",
        "--lambda",
        "480",
        "--n-current",
        "17",
        "--scan-max",
        "200",
        "--max-servers",
        "200",
    ]);
    assert_eq!(v["agrees"], Value::Bool(true));
    assert_eq!(v["n_next"], v["exhaustive_n_next"]);
}

#[test]
fn decide_zero_rate_releases_all() {
    let v = json(&["decide", "--lambda", "0", "--n-current", "5"]);
    assert_eq!(v["n_next"].as_u64(), Some(0));
    assert_eq!(v["n_minus"].as_u64(), Some(5));
}

#[test]
fn sweep_boot_time_is_monotone() {
    let csv_text = ok(&[
        "sweep",
        "--axis",
        "t_U",
        "--from",
        "0",
        "--to",
        "50",
        "--steps",
        "6",
        "--lambda",
        "480",
        "--n-current",
        "15",
    ]);
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        [
            "value",
            "margin_per_job",
            "n_current",
            "n_next",
            "n_plus",
            "n_minus",
            "predicted_profit",
            "predicted_blocking"
        ]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    let col = |r: &csv::StringRecord, i: usize| r[i].parse::<f64>().unwrap();
    for w in rows.windows(2) {
        assert!(col(&w[1], 4) <= col(&w[0], 4), "n_plus grew");
        assert!(col(&w[1], 6) <= col(&w[0], 6) + 1e-9, "profit grew");
    }
}

#[test]
fn sweep_charge_has_release_all_region() {
    let v = json(&[
        "sweep",
        "--axis",
        "charge",
        "--from",
        "0",
        "--to",
        "0.004",
        "--steps",
        "9",
        "--lambda",
        "480",
        "--n-current",
        "15",
    ]);
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts[0]["n_next"].as_u64(), Some(0));
    assert_eq!(pts[0]["predicted_blocking"].as_f64(), Some(1.0));
    let blocking: Vec<f64> = pts
        .iter()
        .map(|p| p["predicted_blocking"].as_f64().unwrap())
        .collect();
    assert!(blocking.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn usage_errors_exit_with_two() {
    let out = profitscale(&[
        "sweep", "--axis", "t_U", "--from", "0", "--to", "50", "--steps", "0", "--lambda", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let out = profitscale(&["blocking", "--n", "3", "--rho", "-1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = profitscale(&[
        "sweep", "--axis", "nope", "--from", "0", "--to", "1", "--lambda", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_always_on_bills_480_hours() {
    let dir = tempfile::tempdir().unwrap();
    let text = simulate(dir.path(), &["--policy", "always_on"]);
    assert!(text.contains("server-hours   480"), "{text}");
    let report: Value =
        serde_json::from_slice(&fs::read(dir.path().join("always_on.json")).unwrap()).unwrap();
    assert_eq!(report["aggregates"]["server_hours"].as_u64(), Some(480));
    assert_eq!(report["epochs"].as_array().unwrap().len(), 24);
    assert!(report["manifest"].is_object());
    assert!(dir.path().join("always_on.csv").exists());
    assert!(dir.path().join("always_on.manifest.json").exists());
}

#[test]
fn manifest_rerun_is_byte_identical() {
    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let mut args = vec!["--policy", "grassmann", "--seed", "7"];
    args.extend_from_slice(SMALL);
    simulate(first.path(), &args);
    let manifest = first.path().join("grassmann.manifest.json");
    simulate(second.path(), &["--manifest", manifest.to_str().unwrap()]);
    for name in ["grassmann.json", "grassmann.csv", "grassmann.manifest.json"] {
        assert_eq!(
            fs::read(first.path().join(name)).unwrap(),
            fs::read(second.path().join(name)).unwrap(),
            "{name} differs"
        );
    }
}

#[test]
fn all_policies_write_sorted_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["--policy", "all"];
    args.extend_from_slice(SMALL);
    simulate(dir.path(), &args);
    for p in ["always_on", "optimal", "qed", "grassmann", "reactive"] {
        assert!(dir.path().join(format!("{p}.json")).exists(), "{p}");
    }
    let mut rdr = csv::Reader::from_path(dir.path().join("comparison.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 5);
    let profits: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(profits.windows(2).all(|w| w[0] >= w[1]));
    // The table is derived from the individual reports.
    for r in &rows {
        let report: Value =
            serde_json::from_slice(&fs::read(dir.path().join(format!("{}.json", &r[0]))).unwrap())
                .unwrap();
        let total = report["aggregates"]["total_profit_cents"].as_f64().unwrap();
        assert!((total - r[1].parse::<f64>().unwrap()).abs() < 1e-4);
    }
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.conf");
    fs::write(
        &config,
        "# fixed fleet on a short trace\n\
         trace.source = synthetic\n\
         synth.days = 1\n\
         synth.base_rate = 600\n\
         synth.amplitude = 300\n\
         policy = always_on\n\
         always_on.servers = 4\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let summary = json(&[
        "--out-dir",
        out.to_str().unwrap(),
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--set",
        "always_on.servers=3",
    ]);
    assert_eq!(summary[0]["server_hours"].as_u64(), Some(72));
    let manifest: Value =
        serde_json::from_slice(&fs::read(out.join("always_on.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["always_on.servers"], "3");
    assert_eq!(manifest["config"]["billing.cost"], "17");
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = profitscale(&[
        "--out-dir",
        dir.path().to_str().unwrap(),
        "simulate",
        "--set",
        "billing.cots=3",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("billing.cots"));
}

#[test]
fn counts_trace_input_is_digested() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.csv");
    let mut text = String::from("minute,count\n");
    for m in 0..180 {
        text.push_str(&format!("{m},{}\n", 900 + (m % 60) * 10));
    }
    fs::write(&counts, text).unwrap();
    let out = dir.path().join("out");
    let summary = json(&[
        "--out-dir",
        out.to_str().unwrap(),
        "simulate",
        "--trace",
        counts.to_str().unwrap(),
        "--policy",
        "qed",
    ]);
    // Counts are expected totals; the realized stream is Poisson around them.
    let expected = (0..180).map(|m| 900 + (m % 60) * 10).sum::<u64>() as f64;
    let arrived = summary[0]["jobs_arrived"].as_f64().unwrap();
    assert!(
        (arrived - expected).abs() < 4.0 * expected.sqrt(),
        "{arrived}"
    );
    let manifest: Value =
        serde_json::from_slice(&fs::read(out.join("qed.manifest.json")).unwrap()).unwrap();
    let inputs = manifest["inputs"].as_array().unwrap();
    assert_eq!(inputs.len(), 1);
    assert_eq!(inputs[0]["sha256"].as_str().unwrap().len(), 64);

    // Editing the input afterwards makes the manifest refuse to replay.
    fs::write(&counts, "minute,count\n0,1\n").unwrap();
    let again = profitscale(&[
        "--out-dir",
        dir.path().join("again").to_str().unwrap(),
        "simulate",
        "--manifest",
        out.join("qed.manifest.json").to_str().unwrap(),
    ]);
    assert!(!again.status.success());
}

#[test]
fn forecast_constant_series() {
    let dir = tempfile::tempdir().unwrap();
    let series = dir.path().join("flat.txt");
    fs::write(&series, "250\n".repeat(96)).unwrap();
    let v = json(&[
        "forecast",
        "--series",
        series.to_str().unwrap(),
        "--horizon",
        "3",
    ]);
    for f in v["forecast"].as_array().unwrap() {
        assert!((f.as_f64().unwrap() - 250.0).abs() < 1e-6);
    }
    assert!(v["backtest"]["mean_abs"].as_f64().unwrap() < 1e-9);
}

#[test]
fn forecast_bundled_trace_backtest() {
    let v = json(&["forecast", "--bundled"]);
    assert_eq!(v["backtest"]["holdout"].as_u64(), Some(24));
    assert!(v["backtest"]["mean_abs"].as_f64().unwrap() < 0.15);
    let counted: u64 = v["backtest"]["histogram"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| b["count"].as_u64().unwrap())
        .sum();
    assert_eq!(counted, 24);
}

#[test]
fn forecast_needs_an_input() {
    let out = profitscale(&["forecast"]);
    assert!(!out.status.success());
}
