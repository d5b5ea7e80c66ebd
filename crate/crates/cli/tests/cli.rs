use std::path::Path;
use std::process::{Command, Output};

use pathfollow::experiments::ExperimentConfig;

fn pathfollow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathfollow"))
        .args(args)
        .env("PATHFOLLOW_THREADS", "1")
        .output()
        .unwrap()
}

const SMALL: &[&str] = &["--n", "40", "--p", "4", "--t-max", "4", "--samples", "5", "--seeds", "1-2"];

fn with_small<'a>(cmd: &'a str, out: &'a Path, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd, "--out", out.to_str().unwrap()];
    v.extend_from_slice(SMALL);
    v.extend_from_slice(extra);
    v
}

fn data_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn solve_path_succeeds_and_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let out = pathfollow(&with_small("solve-path", dir.path(), &["--methods", "newton,gd", "--epsilon", "1e-3"]));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["config.json", "eval.csv", "summary.csv", "failures.csv"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    assert_eq!(data_rows(&dir.path().join("eval.csv")), 4);
    assert_eq!(data_rows(&dir.path().join("failures.csv")), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("results written to"));
}

#[test]
fn compare_with_matched_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = pathfollow(&with_small("compare", dir.path(), &["--alpha1", "0.05", "--match-budget", "newton"]));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(data_rows(&dir.path().join("eval.csv")), 8);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(pathfollow(&["solve-path", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(pathfollow(&with_small("solve-path", dir.path(), &["--methods", "simplex"])).status.code(), Some(2));
    assert_eq!(pathfollow(&with_small("solve-path", dir.path(), &["--epsilon", "-1"])).status.code(), Some(2));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = pathfollow(&["solve-path", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("eval.csv").exists());
}

#[test]
fn failed_cells_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = pathfollow(&with_small(
        "solve-path",
        dir.path(),
        &["--methods", "newton", "--alpha1", "0.1", "--step-rule", "certified"],
    ));
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(data_rows(&dir.path().join("failures.csv")), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("failures.csv"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    let first = pathfollow(&with_small("solve-path", dir.path(), &["--methods", "newton", "--epsilon", "1e-2"]));
    assert_eq!(first.status.code(), Some(0));
    std::fs::copy(dir.path().join("config.json"), &cfg_path).unwrap();

    let out2 = dir.path().join("second");
    let out = pathfollow(&[
        "solve-path",
        "--config",
        cfg_path.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
        "--p",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let written = ExperimentConfig::from_json_file(&out2.join("config.json")).unwrap();
    assert_eq!(written.p, 3);
    assert_eq!(written.n, 40);
    assert_eq!(written.seeds, vec![1, 2]);
}

#[test]
fn gen_data_writes_dataset_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = pathfollow(&with_small("gen-data", dir.path(), &["--scenario", "regression"]));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let data = dir.path().join("regression_n40_p4_seed2.data.csv");
    let truth = dir.path().join("regression_n40_p4_seed2.truth.csv");
    assert_eq!(data_rows(&data), 40);
    assert_eq!(data_rows(&truth), 4);
    assert!(String::from_utf8_lossy(&out.stdout).contains("seed1.data.csv"));
}

#[test]
fn verify_a1_reports_each_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = pathfollow(&with_small("verify-a1", dir.path(), &["--losses", "logistic-regression,exponential"]));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("logistic-regression") && stdout.contains("exponential"));
    assert_eq!(data_rows(&dir.path().join("a1.csv")), 2);
    let bad = pathfollow(&with_small("verify-a1", dir.path(), &["--losses", "hinge"]));
    assert_eq!(bad.status.code(), Some(2));
}
