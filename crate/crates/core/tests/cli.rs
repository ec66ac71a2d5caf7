//! Command-line pipeline: artifacts, exit codes and determinism.

use std::path::Path;
use std::process::Command;

use american_rb::cli::{run_with, EXIT_CONFIG, EXIT_MISSING_ARTIFACT, EXIT_OK};

fn run(out: &Path, args: &[&str]) -> i32 {
    let out = out.to_str().unwrap();
    let mut argv = vec!["american-rb", "--out", out];
    argv.extend_from_slice(args);
    run_with(argv)
}

fn read(path: impl AsRef<Path>) -> String {
    std::fs::read_to_string(path).unwrap()
}

fn json(path: impl AsRef<Path>) -> serde_json::Value {
    serde_json::from_str(&read(path)).unwrap()
}

#[test]
fn truth_writes_every_step_and_node() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["truth", "--mu", "100,0.05,0.0015,0.5"]), EXIT_OK);
    let csv = read(dir.path().join("truth_trajectory.csv"));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("step,t,s,u,lambda,price"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 21 * 99);
    assert!(rows[0].starts_with("0,"));
    assert_eq!(rows[0].split(',').nth(4), Some(""));
    let summary = json(dir.path().join("truth_summary.json"));
    assert_eq!(summary["schema_version"], 1);
    assert!(summary["feasibility_residuals"]["max_complementarity"].as_f64().unwrap() <= 1e-9);
    assert_eq!(summary["final_price_curve"]["price"].as_array().unwrap().len(), 99);
    assert_eq!(summary["pdas_iteration_stats"]["per_step"].as_array().unwrap().len(), 20);
}

#[test]
fn numbers_carry_seventeen_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["truth"]), EXIT_OK);
    let csv = read(dir.path().join("truth_trajectory.csv"));
    let row = csv.lines().nth(150).unwrap();
    let s = row.split(',').nth(2).unwrap();
    let mantissa = s.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{s}");
}

#[test]
fn malformed_config_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    std::fs::write(&config, "{\"mesh\": {\"H\": \"many\"}}").unwrap();
    let code = run(dir.path(), &["--config", config.to_str().unwrap(), "truth"]);
    assert_eq!(code, EXIT_CONFIG);
    assert_eq!(run(dir.path(), &["truth", "--mu", "1,2"]), EXIT_CONFIG);
    assert_eq!(run(dir.path(), &["no-such-command"]), EXIT_CONFIG);
}

#[test]
fn missing_model_exits_with_missing_artifact() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["online", "--model", "/nonexistent/m.json"]), EXIT_MISSING_ARTIFACT);
    assert_eq!(run(dir.path(), &["validate"]), EXIT_MISSING_ARTIFACT);
}

#[test]
fn corrupted_model_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["offline"]), EXIT_OK);
    assert_eq!(run(dir.path(), &["validate"]), EXIT_OK);
    let path = dir.path().join("model.json");
    let text = read(&path);
    let damaged = text.replacen("\"schema_version\":1", "\"schema_version\":2", 1);
    std::fs::write(&path, damaged).unwrap();
    assert_eq!(run(dir.path(), &["validate"]), EXIT_MISSING_ARTIFACT);
}

#[test]
fn offline_then_online_compare() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["offline"]), EXIT_OK);
    let summary = json(dir.path().join("offline_summary.json"));
    assert_eq!(summary["achieved"]["NV"], 16);
    assert_eq!(summary["achieved"]["NW"], 8);
    let eps: Vec<f64> = read(dir.path().join("eps_u.csv"))
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(eps.len(), 8);
    assert!(eps.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(read(dir.path().join("training_params.csv")).lines().count(), 17);

    assert_eq!(run(dir.path(), &["online", "--mu", "100,0.05,0.0015,0.5", "--compare"]), EXIT_OK);
    let cmp = read(dir.path().join("comparison.csv"));
    assert!(cmp.starts_with("step,t,s,u,lambda,price,source\n"));
    assert_eq!(cmp.lines().count(), 1 + 2 * 21 * 99);
    for step in [1, 10, 20] {
        for source in ["truth", "reduced"] {
            let prefix = format!("{step},");
            let suffix = format!(",{source}");
            assert_eq!(
                cmp.lines().filter(|l| l.starts_with(&prefix) && l.ends_with(&suffix)).count(),
                99
            );
        }
    }
    let online = json(dir.path().join("online_summary.json"));
    assert!(online["err_N"].as_f64().unwrap() > 0.0);
    assert_eq!(online["in_box"], true);
}

#[test]
fn out_of_box_parameter_is_flagged_not_rejected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["offline"]), EXIT_OK);
    assert_eq!(run(dir.path(), &["online", "--mu", "106.882366,0.05,0.007679,0.5"]), EXIT_OK);
    assert_eq!(json(dir.path().join("online_summary.json"))["in_box"], false);
}

#[test]
fn study_rows_and_sizes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["study", "--budgets", "4,4;8,8"]), EXIT_OK);
    let csv = read(dir.path().join("study.csv"));
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        let nv_tilde: usize = r[0].parse().unwrap();
        let nw: usize = r[1].parse().unwrap();
        assert_eq!(r[2].parse::<usize>().unwrap(), nv_tilde + nw);
        assert_eq!(r[4], "\"ok\"");
    }
    let report = read(dir.path().join("errors_8_8.csv"));
    assert_eq!(report.lines().count(), 12);
    assert!(report.lines().last().unwrap().starts_with("ERR_LINF,,,,"));
    assert_eq!(read(dir.path().join("test_params.csv")).lines().count(), 11);
}

#[test]
fn same_seed_gives_identical_artifacts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        assert_eq!(run(dir, &["--seed", "9", "offline"]), EXIT_OK);
        assert_eq!(run(dir, &["online", "--compare"]), EXIT_OK);
    }
    for name in ["model.json", "eps_u.csv", "eps_lambda.csv", "comparison.csv", "online_summary.json"] {
        assert_eq!(std::fs::read(a.path().join(name)).unwrap(), std::fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let c = tempfile::tempdir().unwrap();
    assert_eq!(run(c.path(), &["--seed", "10", "offline"]), EXIT_OK);
    assert_ne!(read(a.path().join("model.json")), read(c.path().join("model.json")));
}

#[test]
fn binary_reports_exit_codes_and_gnuplot() {
    let bin = env!("CARGO_BIN_EXE_american-rb");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let status = Command::new(bin)
        .args(["--out", out, "online", "--model", "/nonexistent.json"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&status.stderr).unwrap();
    assert_eq!(err["exit_code"], 3);

    let truth = Command::new(bin).args(["--out", out, "truth", "--gnuplot"]).output().unwrap();
    assert_eq!(truth.status.code(), Some(0));
    let script = String::from_utf8(truth.stdout).unwrap();
    assert!(script.contains("set datafile separator ','"));
    assert!(script.contains("$1==10"));
}
