use std::process::{Command, Output};

use serde_json::Value;

fn qed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qed-dim")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn cell(v: &Value, column: &str) -> f64 {
    let idx = v["columns"].as_array().unwrap().iter().position(|c| c == column).unwrap();
    v["rows"][0][idx].as_f64().unwrap()
}

#[test]
fn eval_reports_revenue_near_plotted_value() {
    let v = json(&qed(&["eval", "--s", "10", "--gamma", "2.11765", "--eta", "2", "--a", "0.1", "--b", "1", "--d", "0"]));
    assert_eq!(v["schema_version"], 1);
    assert!((cell(&v, "rhat_s") + 0.212128).abs() < 1e-5, "{}", cell(&v, "rhat_s"));
    let at2 = json(&qed(&["eval", "--s", "10", "--gamma", "2"]));
    assert!((cell(&at2, "rhat_s") + 0.2009).abs() < 1e-3);
}

#[test]
fn infeasible_slack_is_a_validation_error() {
    let out = qed(&["eval", "--s", "10", "--gamma", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("lambda must be positive"));
}

#[test]
fn missing_and_unknown_flags_exit_two() {
    assert_eq!(qed(&["eval", "--s", "10"]).status.code(), Some(2));
    assert_eq!(qed(&["eval", "--s", "10", "--gamma", "1", "--bogus", "1"]).status.code(), Some(2));
    assert_eq!(qed(&["optimize", "--order", "1"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_three() {
    // target delay unreachable on the interval: no sign change
    let out = qed(&["delay-staff", "--epsilon", "0.999", "--order", "0", "--gamma-lo", "1", "--gamma-hi", "2"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn joint_cell_rounds_to_table_entry() {
    let v = json(&qed(&["joint", "--a", "0.5", "--b", "1", "--d", "0.5"]));
    assert_eq!(cell(&v, "gamma_opt_1dp"), 0.5);
    assert_eq!(cell(&v, "eta_opt_1dp"), 0.8);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "s = 10\ngamma = 4.0\neta = 2.0\na = 0.1\n").unwrap();
    let path = cfg.to_str().unwrap();
    // config alone is infeasible, the flag overrides gamma
    assert_eq!(qed(&["eval", "--config", path]).status.code(), Some(2));
    let v = json(&qed(&["eval", "--config", path, "--gamma", "2.11765"]));
    assert!((cell(&v, "rhat_s") + 0.212128).abs() < 1e-5);

    std::fs::write(&cfg, "s = 10\nwhatever = 1\n").unwrap();
    let out = qed(&["eval", "--config", path, "--gamma", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown config key 'whatever'"));
}

#[test]
fn gap_sweep_csv_header_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = qed(&["gap-sweep", "--format", "csv", "--output", p.to_str().unwrap(), "--s-max", "20"]);
        assert!(out.status.success());
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().next().unwrap(), "s,err_expansion,gap_gamma_0,gap_gamma_1,gap_value_0,gap_value_1");
    assert_eq!(text.lines().count(), 12);
    let row10: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row10[1], 0.00555306);

    // the fit subcommand reads the artifact back
    let out = qed(&["fit", "--input", a.to_str().unwrap(), "--column", "gap_gamma_0", "--model", "inv-sqrt"]);
    let v = json(&out);
    assert!(cell(&v, "rss") >= 0.0);
}

#[test]
fn thread_cap_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_qed-dim"))
        .args(["gap-sweep", "--s-max", "12"])
        .env("QED_DIM_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let bad = Command::new(env!("CARGO_BIN_EXE_qed-dim"))
        .args(["gap-sweep", "--s-max", "12"])
        .env("QED_DIM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn simulate_and_refined_staffing_run() {
    let v = json(&qed(&["simulate", "--s", "5", "--gamma", "1", "--events", "100000", "--warmup", "5000", "--seed", "3"]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    let r = json(&qed(&["delay-staff", "--epsilon", "0.3", "--order", "refined", "--s", "100", "--n-max", "3"]));
    let e = json(&qed(&["delay-staff", "--epsilon", "0.3", "--order", "1", "--s", "100"]));
    assert!((cell(&r, "gamma") - cell(&e, "gamma")).abs() <= 1e-4);
}
