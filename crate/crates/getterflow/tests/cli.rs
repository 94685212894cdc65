//! End-to-end checks of the installed binary: exit codes, output formats,
//! config echo round-trips, and worker-count independence.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use getterflow::analysis::synthesize_decay_log;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_getterflow"));
    c.env_remove("GETTERFLOW_WORKERS");
    c
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn write_sim_config(path: &Path, seed: u64) {
    let cfg = serde_json::json!({
        "version": 1,
        "geometry": {
            "kind": "polygon_pocket",
            "sides": 6,
            "side_length": 1.0,
            "theta_deg": 20.0,
            "truncation_ratio": 0.2
        },
        "model": "cosine_law",
        "particles": 20000,
        "seed": seed,
        "sticking": [0.1855, 1.0]
    });
    fs::write(path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
}

fn write_log_csv(path: &Path, gamma: f64, intake: f64, p0: f64, dt: f64, samples: usize) {
    let series = synthesize_decay_log("log", gamma, intake, p0, dt, samples).unwrap();
    let mut text = String::from("time_s,pressure_mbar\n");
    for (t, p) in series.times.iter().zip(&series.pressures) {
        text.push_str(&format!("{t},{p:e}\n"));
    }
    fs::write(path, text).unwrap();
}

#[test]
fn simulate_is_reproducible_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.json");
    write_sim_config(&cfg, 7);

    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    run_ok(&["simulate", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    run_ok(&["simulate", "--config", cfg.to_str().unwrap(), "--out", b.to_str().unwrap()]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "reruns differ");

    let parsed: serde_json::Value = serde_json::from_str(&fs::read_to_string(&a).unwrap()).unwrap();
    assert!(parsed["report"]["mean_collisions"].as_f64().unwrap() > 1.0);
    assert_eq!(parsed["report"]["n_particles"].as_u64().unwrap(), 20000);
    let capture = parsed["capture"].as_array().unwrap();
    assert_eq!(capture.len(), 2);
    assert!((capture[1]["sticking"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    // The echoed config is itself a valid run configuration and reproduces
    // the same report byte for byte.
    let echoed = dir.path().join("echo.json");
    fs::write(&echoed, serde_json::to_string(&parsed["config"]).unwrap()).unwrap();
    let c = dir.path().join("c.json");
    run_ok(&["simulate", "--config", echoed.to_str().unwrap(), "--out", c.to_str().unwrap()]);
    let reparsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&c).unwrap()).unwrap();
    assert_eq!(parsed["report"], reparsed["report"]);
}

#[test]
fn simulate_flag_overrides_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.json");
    write_sim_config(&cfg, 7);
    let out = run_ok(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "99",
        "--particles",
        "500",
    ]);
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["report"]["seed"].as_u64().unwrap(), 99);
    assert_eq!(parsed["report"]["n_particles"].as_u64().unwrap(), 500);
}

#[test]
fn simulate_csv_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.json");
    write_sim_config(&cfg, 7);
    let out =
        run_ok(&["simulate", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("collisions,count"));
    let total: u64 =
        lines.map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 20000, "histogram counts must cover every particle");
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sim.json");
    write_sim_config(&cfg, 7);

    let w1 = dir.path().join("w1.json");
    let w4 = dir.path().join("w4.json");
    let we = dir.path().join("we.json");
    run_ok(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--workers", "1", "--out",
        w1.to_str().unwrap(),
    ]);
    run_ok(&[
        "simulate", "--config", cfg.to_str().unwrap(), "--workers", "4", "--out",
        w4.to_str().unwrap(),
    ]);
    let out = bin()
        .env("GETTERFLOW_WORKERS", "2")
        .args(["simulate", "--config", cfg.to_str().unwrap(), "--out", we.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    let bytes = fs::read(&w1).unwrap();
    assert_eq!(bytes, fs::read(&w4).unwrap(), "1 vs 4 workers differ");
    assert_eq!(bytes, fs::read(&we).unwrap(), "env-configured workers differ");
}

#[test]
fn config_errors_exit_2_with_json_diagnostics() {
    let dir = tempfile::tempdir().unwrap();

    // Missing file is an environment failure, not a content failure.
    let missing = bin()
        .args(["simulate", "--config", dir.path().join("nope.json").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(3), "missing config must exit 3");
    let msg: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&missing.stderr).trim()).unwrap();
    assert_eq!(msg["error"], "io_error");
    assert!(msg["message"].is_string());

    // Unknown field.
    let cfg = dir.path().join("bad.json");
    fs::write(
        &cfg,
        r#"{"version":1,"geometry":{"kind":"polygon_pocket","sides":6,"side_length":1.0,
            "theta_deg":20.0,"truncation_ratio":0.2},"model":"cosine_law","particles":10,
            "seed":1,"bogus":true}"#,
    )
    .unwrap();
    let unknown = bin().args(["simulate", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(unknown.status.code(), Some(2), "unknown field must exit 2");
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("bogus"));

    // Invalid geometry parameter.
    let cfg2 = dir.path().join("bad2.json");
    fs::write(
        &cfg2,
        r#"{"version":1,"geometry":{"kind":"polygon_pocket","sides":2,"side_length":1.0,
            "theta_deg":20.0,"truncation_ratio":0.2},"model":"cosine_law","particles":10,
            "seed":1}"#,
    )
    .unwrap();
    let invalid = bin().args(["simulate", "--config", cfg2.to_str().unwrap()]).output().unwrap();
    assert_eq!(invalid.status.code(), Some(2), "invalid geometry must exit 2");
}

#[test]
fn runtime_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // A log that never decays below the truncation threshold.
    let log = dir.path().join("flatline.csv");
    write_log_csv(&log, 0.0, 0.0, 3e-5, 1.0, 50);
    let cfg = dir.path().join("an.json");
    fs::write(
        &cfg,
        serde_json::to_string(&serde_json::json!({
            "version": 1,
            "sample_log": "flatline.csv"
        }))
        .unwrap(),
    )
    .unwrap();
    let out = bin().args(["analyze", "--config", cfg.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "runtime analysis failure must exit 3");
    let msg: serde_json::Value =
        serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(msg["error"], "threshold_never_reached");
}

#[test]
fn sweep_writes_rows_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.json");
    fs::write(
        &cfg,
        serde_json::to_string(&serde_json::json!({
            "version": 1,
            "sweep": {
                "family": "pocket_theta",
                "sides": 6,
                "side_length": 1.0,
                "truncation_ratio": 0.0,
                "theta_deg": [20.0, 45.0, 80.0]
            },
            "particles": 5000,
            "seed": 11
        }))
        .unwrap(),
    )
    .unwrap();

    let csv = dir.path().join("rows.csv");
    let svg = dir.path().join("sweep.svg");
    run_ok(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--format", "csv", "--out",
        csv.to_str().unwrap(), "--plot", svg.to_str().unwrap(),
    ]);

    let rows = fs::read_to_string(&csv).unwrap();
    let mut lines = rows.lines();
    assert_eq!(lines.next().unwrap(), getterflow::sweep::SWEEP_CSV_HEADER);
    assert_eq!(lines.count(), 6, "3 angles x 2 default models");
    for needle in ["pocket_theta", "cosine_law", "isotropic_half_space"] {
        assert!(rows.contains(needle), "CSV lacks {needle}");
    }

    let plot = fs::read_to_string(&svg).unwrap();
    assert!(plot.starts_with("<svg"), "plot is not an SVG document");
    for needle in ["cosine_law", "isotropic_half_space", "surface angle (deg)"] {
        assert!(plot.contains(needle), "plot lacks {needle}");
    }

    // JSON output lists the same rows.
    let out = run_ok(&["sweep", "--config", cfg.to_str().unwrap()]);
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn analyze_recovers_rates_and_compares_areas() {
    let dir = tempfile::tempdir().unwrap();
    // Pocket-sample pump-down and plain-reference pump-down, both exact.
    write_log_csv(&dir.path().join("sample.csv"), 2.5e-3, 2.5e-9, 3e-5, 5.0, 100);
    write_log_csv(&dir.path().join("reference.csv"), 1.1e-3, 1.1e-9, 3e-5, 10.0, 120);

    let cfg = dir.path().join("an.json");
    fs::write(
        &cfg,
        serde_json::to_string(&serde_json::json!({
            "version": 1,
            "sample_log": "sample.csv",
            "comparison": {
                "reference_log": "reference.csv",
                "areas": {
                    "reference": 1134.0,
                    "structured": 726.0,
                    "mouths": 508.0,
                    "spillover": 354.0
                },
                "modes": ["structured_region", "pocket_mouths"]
            }
        }))
        .unwrap(),
    )
    .unwrap();

    let out = run_ok(&["analyze", "--config", cfg.to_str().unwrap()]);
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let gamma = parsed["analysis"]["fit"]["gamma"].as_f64().unwrap();
    assert!(
        (gamma - 2.5e-3).abs() < 1e-3 * 2.5e-3,
        "fitted gamma {gamma} is not the synthesized 2.5e-3"
    );
    let rows = parsed["comparison"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let eta: f64 = rows[0]["enhancement"].as_f64().unwrap();
    let eta_mouths: f64 = rows[1]["enhancement"].as_f64().unwrap();
    assert!((eta - 2.988).abs() < 0.02, "structured-region gain {eta}");
    assert!((eta_mouths - 3.841).abs() < 0.02, "mouth-area gain {eta_mouths}");

    // CSV rendering carries the fit and the comparison as comments.
    let out = run_ok(&["analyze", "--config", cfg.to_str().unwrap(), "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with('#') && l.contains("gamma")));
    assert!(text.lines().any(|l| l.contains("pressure,sample_rate,control_rate,net_rate")));

    // Threshold override is echoed back.
    let out = run_ok(&[
        "analyze", "--config", cfg.to_str().unwrap(), "--threshold", "2e-5",
    ]);
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(parsed["config"]["threshold"].as_f64().unwrap(), 2e-5);
    assert_eq!(parsed["analysis"]["threshold"].as_f64().unwrap(), 2e-5);
}

#[test]
fn control_subtraction_isolates_sample_rate() {
    let dir = tempfile::tempdir().unwrap();
    // The control log carries a slower pumping channel; analyzing the sum
    // log against it must return the channel that is not in the control.
    write_log_csv(&dir.path().join("both.csv"), 3.0e-3, 3.0e-9, 3e-5, 5.0, 90);
    write_log_csv(&dir.path().join("control.csv"), 1.0e-3, 1.0e-9, 3e-5, 5.0, 90);
    let cfg = dir.path().join("an.json");
    fs::write(
        &cfg,
        serde_json::to_string(&serde_json::json!({
            "version": 1,
            "sample_log": "both.csv",
            "control_log": "control.csv"
        }))
        .unwrap(),
    )
    .unwrap();
    let out = run_ok(&["analyze", "--config", cfg.to_str().unwrap()]);
    let parsed: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let gamma = parsed["analysis"]["fit"]["gamma"].as_f64().unwrap();
    assert!(
        (gamma - 2.0e-3).abs() < 5e-3 * 2.0e-3,
        "net gamma {gamma} is not the 2.0e-3 difference channel"
    );
    assert!(parsed["analysis"]["control_rate"].is_array());
}
