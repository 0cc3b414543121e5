//! End-to-end checks of the madreg binary: exit codes, output formats, and
//! the simulate/report round trip.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn madreg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_madreg"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, contents: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, contents).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn fit_three_point_intercept_example() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "X.csv", "1\n1\n1\n");
    let y = write(dir.path(), "Y.csv", "1\n2\n4\n");
    let out = madreg(&["fit", "--design", &x, "--response", &y], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout, "beta_1,objective\n2,1\n");
}

#[test]
fn fit_with_intercept_flag() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "X.csv", "0\n1\n2\n3\n4\n");
    let y = write(dir.path(), "Y.csv", "1\n2\n3\n4\n100\n");
    let out = madreg(
        &["fit", "--design", &x, "--response", &y, "--intercept"],
        dir.path(),
    );
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("beta_1,beta_2,objective\n"));
    // median regression ignores the outlier: intercept 1, slope 1
    let vals: Vec<f64> = stdout.lines().nth(1).unwrap()
        .split(',')
        .map(|v| v.parse().unwrap())
        .collect();
    assert!((vals[0] - 1.0).abs() < 1e-9);
    assert!((vals[1] - 1.0).abs() < 1e-9);
}

#[test]
fn missing_config_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = madreg(&["simulate", "--config", "missing.file"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_config_key_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "replicates = 5\nbogus_key = 1\n");
    let out = madreg(&["simulate", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus_key"));
}

#[test]
fn unknown_flag_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = madreg(&["simulate", "--frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn rank_deficient_design_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "X.csv", "1,2\n2,4\n3,6\n");
    let y = write(dir.path(), "Y.csv", "1\n2\n3\n");
    let out = madreg(&["fit", "--design", &x, "--response", &y], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn overlarge_empirical_correction_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "X.csv", "1\n1\n1\n1\n1\n");
    let y = write(dir.path(), "Y.csv", "1\n2\n3\n4\n10\n");
    // an absurd bandwidth sends f0_hat to ~0, so c_hat >= 1
    let out = madreg(
        &[
            "estimate", "--design", &x, "--response", &y, "--bandwidth", "1e9",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn majority_replicate_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    // a fixed absurd bandwidth fails the empirical correction everywhere
    let out = madreg(
        &[
            "simulate", "--out", "sim", "--p", "4", "--k", "2", "--designs", "anova",
            "--errors", "laplace", "--replicates", "10", "--bandwidth", "1e9",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("failed"));
}

#[test]
fn estimate_prints_metadata_and_values() {
    let dir = tempfile::tempdir().unwrap();
    let x = write(dir.path(), "X.csv", "1\n1\n1\n1\n1\n1\n1\n");
    let y = write(dir.path(), "Y.csv", "0.3\n-1.2\n2.4\n0.9\n-0.2\n1.7\n-2.6\n");
    let out = madreg(&["estimate", "--design", &x, "--response", &y], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("# n = 7"));
    assert!(stdout.contains("# p = 1"));
    assert!(stdout.contains("# bandwidth = "));
    assert!(stdout.contains("gamma_hat,f0_hat,c_hat,gamma_check"));
}

#[test]
fn design_subcommand_emits_anova_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = madreg(
        &[
            "design", "--kind", "anova", "--p", "2", "--replicates-per-group", "2",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "1,0\n1,0\n0,1\n0,1\n"
    );
}

#[test]
fn simulate_then_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = madreg(
        &[
            "simulate", "--out", "sim", "--p", "2,4", "--k", "2,4", "--designs", "anova",
            "--errors", "laplace", "--replicates", "20",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["records.csv", "summary.csv", "meta.txt"] {
        assert!(dir.path().join("sim").join(f).exists(), "missing {f}");
    }
    let out = madreg(
        &[
            "report", "--records", "sim/records.csv", "--out", "rep",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(dir.path().join("rep/qq_anova_laplace.svg").exists());
    assert!(dir.path().join("rep/summary.csv").exists());

    // --csv-only skips rendering
    let out = madreg(
        &[
            "report", "--records", "sim/records.csv", "--out", "rep2", "--csv-only",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    assert!(dir.path().join("rep2/summary.csv").exists());
    assert!(!dir.path().join("rep2/qq_anova_laplace.svg").exists());
}

#[test]
fn meta_echo_reproduces_the_run_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "simulate", "--out", "run1", "--p", "2,4", "--k", "2,4", "--designs", "anova",
        "--errors", "normal", "--replicates", "15", "--base-seed", "555",
    ];
    assert!(madreg(&args, dir.path()).status.success());
    let meta = dir.path().join("run1/meta.txt");
    let out = madreg(
        &[
            "simulate", "--config", meta.to_str().unwrap(), "--out", "run2",
        ],
        dir.path(),
    );
    assert!(out.status.success());
    let a = fs::read(dir.path().join("run1/records.csv")).unwrap();
    let b = fs::read(dir.path().join("run2/records.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn summary_matches_spreadsheet_recompute_on_exported_records() {
    let dir = tempfile::tempdir().unwrap();
    assert!(madreg(
        &[
            "simulate", "--out", "sim", "--p", "4", "--k", "4", "--designs", "anova",
            "--errors", "laplace", "--replicates", "40",
        ],
        dir.path(),
    )
    .status
    .success());
    // naive recomputation of the gamma_hat cell mean/variance from the CSV
    let records = fs::read_to_string(dir.path().join("sim/records.csv")).unwrap();
    let mut vals = Vec::new();
    for line in records.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        vals.push(fields[10].parse::<f64>().unwrap());
    }
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);

    let summary = fs::read_to_string(dir.path().join("sim/summary.csv")).unwrap();
    let row = summary
        .lines()
        .find(|l| l.contains("gamma_hat"))
        .expect("gamma_hat row");
    let fields: Vec<&str> = row.split(',').collect();
    let smean: f64 = fields[9].parse().unwrap();
    let svar: f64 = fields[10].parse().unwrap();
    assert!((smean - mean).abs() < 1e-12);
    assert!((svar - var).abs() < 1e-12);
}
