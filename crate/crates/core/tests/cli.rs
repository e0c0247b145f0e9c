use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cubicvar"))
        .args(args)
        .env_remove("CUBICVAR_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let o = run(&all);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&stdout(&o)).unwrap()
}

/// Data rows of a CSV report, skipping `#` metadata lines and the header.
fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn kappa_reports_value_and_order() {
    let v = json(&["kappa", "--tol", "1e-10"]);
    assert!((v["kappa2"].as_f64().unwrap() - 5.391164368227).abs() < 1e-10);
    assert_eq!(v["order"], 256);
    assert_eq!(v["metadata"]["tol"].as_f64(), Some(1e-10));
}

#[test]
fn classify_worked_example() {
    let o = run(&["classify", "--a", "2*n", "--b", "3*n+1"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kind"], "RationalFiniteK");
    assert_eq!((v["p"].as_u64(), v["q"].as_u64(), v["k"].as_i64()), (Some(3), Some(2), Some(1)));
    assert_eq!(v["evidence"].as_array().unwrap().len(), 3);
}

#[test]
fn rho_curve_csv() {
    let o = run(&["rho", "--p", "1", "--q", "1", "--k", "1", "--curve", "0.05:1.0:20"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# regime=RationalFiniteK"));
    let (header, rows) = csv_rows(&text);
    assert_eq!(header, ["t", "rho", "corr"]);
    assert_eq!(rows.len(), 20);
    assert_eq!(rows[0][0], 0.05);
    assert_eq!(rows[19][0], 1.0);
    let at = rows.iter().find(|r| (r[0] - 0.8).abs() < 1e-12).unwrap();
    assert!((at[2] - 0.075).abs() < 0.01);
}

#[test]
fn csv_values_carry_seventeen_digits() {
    let text = stdout(&run(&["fl", "--L", "1", "--at", "0.25"]));
    let data = text.lines().last().unwrap();
    let mantissa = data.split(',').nth(1).unwrap().split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
}

#[test]
fn metadata_round_trips() {
    let v = json(&["rho", "--p", "2", "--q", "1", "--k", "0.3", "--t", "0.1", "--tol", "3.3e-8", "--seed", "0x2A"]);
    let m = &v["metadata"];
    assert_eq!(m["seed"], 42);
    assert_eq!(m["tol"].as_f64(), Some(3.3e-8));
    assert_eq!(m["k"].as_f64(), Some(0.3));
    assert_eq!(v["rows"][0]["t"].as_f64(), Some(0.1));
}

#[test]
fn decimal_l_is_not_silently_rational() {
    let plain = json(&["rho", "--L", "1.5", "--t", "1"]);
    assert_eq!(plain["metadata"]["L_rational"], false);
    let assumed = json(&["rho", "--L", "1.5", "--assume-rational", "--t", "1"]);
    assert_eq!(assumed["metadata"]["L"], "3/2");
    assert_eq!(assumed["metadata"]["L_rational"], true);
}

#[test]
fn exact_cov_defaults_to_ratio_regime() {
    let v = json(&["exact-cov", "--a", "16", "--b", "32", "--t", "1"]);
    assert_eq!(v["metadata"]["p"], 2);
    assert_eq!(v["metadata"]["q"], 1);
    assert!(v["corr"].as_f64().unwrap() > 0.2);
    assert!(v["predicted"].as_f64().is_some());
}

#[test]
fn simulate_is_reproducible_and_seed_env_is_honoured() {
    let a = stdout(&run(&["simulate", "--a", "8", "--b", "16", "--t", "1", "--reps", "300"]));
    let b = stdout(&run(&["simulate", "--a", "8", "--b", "16", "--t", "1", "--reps", "300", "--seed", "12648430"]));
    assert_eq!(a, b);
    let env = Command::new(env!("CARGO_BIN_EXE_cubicvar"))
        .args(["simulate", "--a", "8", "--b", "16", "--t", "1", "--reps", "300"])
        .env("CUBICVAR_SEED", "7")
        .output()
        .unwrap();
    let env = String::from_utf8(env.stdout).unwrap();
    assert!(env.contains("# seed=7"));
    assert_ne!(a, env);
}

#[test]
fn xrho_table() {
    let v = json(&["xrho", "--p", "1", "--q", "1", "--k", "1", "--T", "1", "--steps", "16", "--reps", "200"]);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 17);
    assert_eq!(rows[0]["var1"].as_f64(), Some(0.0));
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("cubicvar-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("k.csv");
    let o = run(&["kappa", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().contains("kappa2,order"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn usage_errors_exit_2_and_name_the_flag() {
    let o = run(&["classify", "--a", "n^-1", "--b", "n"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--a"));

    let o = run(&["rho", "--p", "1", "--q", "1", "--k", "1", "--curve", "0:1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--curve"));

    let o = run(&["simulate", "--a", "4096", "--b", "4095", "--t", "1", "--reps", "10"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["kappa", "--tol", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--tol"));

    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
}

#[test]
fn numeric_failures_exit_3() {
    // No truncation below 2^20 reaches this tolerance.
    let o = run(&["kappa", "--tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_fast_reports_every_check() {
    let o = run(&["verify", "--fast", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 12);
    let status: Vec<&str> = rows.iter().map(|r| r["status"].as_str().unwrap()).collect();
    assert_eq!(status[8], "SKIP");
    assert_eq!(status[9], "SKIP");
    let all_pass = status.iter().all(|s| *s != "FAIL");
    assert_eq!(o.status.code(), Some(if all_pass { 0 } else { 1 }));
    assert!(rows.iter().all(|r| r["claim"].is_string() && r["computed"].is_string()));
}
