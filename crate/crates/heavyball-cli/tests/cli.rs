//! End-to-end tests of the `heavyball` binary: subcommands, flag and
//! config-file handling, output files, exit codes, and byte determinism.

use std::path::Path;
use std::process::{Command, Output};

fn heavyball(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heavyball"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn read_sorted_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

#[test]
fn phase_writes_expected_files_and_is_byte_deterministic() {
    let dirs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for dir in &dirs {
        let out = heavyball(&[
            "phase",
            "--T",
            "300",
            "--seed",
            "3",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
        // stdout carries the summary
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.contains("experiment=phase"));
        assert!(stdout.contains("beta0.9.t_zeta="));
    }

    let a = read_sorted_files(dirs[0].path());
    let b = read_sorted_files(dirs[1].path());
    assert_eq!(a.len(), 7, "6 beta CSVs plus the summary");
    assert_eq!(a, b, "identical configs must produce identical bytes");

    let csv = a.iter().find(|(name, _)| name == "phase_beta0.3.csv").unwrap();
    let text = String::from_utf8(csv.1.clone()).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,f,norm_w,w_par,norm_w_perp,dist,norm_m"));
    assert_eq!(text.lines().count(), 302, "header plus 301 records");

    assert!(a.iter().any(|(name, _)| name == "phase_beta1to0.9.csv"));
}

#[test]
fn cubic_csv_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = heavyball(&["cubic", "--T", "200", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("cubic_beta0.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,f_gap,norm_w,rho_norm_w,norm_m"));
}

#[test]
fn saddle_and_eig_run_clean() {
    let dir = tempfile::tempdir().unwrap();
    let out = heavyball(&["saddle", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("saddle_beta0.5.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,f,norm_w,w1,w2,norm_m"));

    let out = heavyball(&[
        "eig",
        "--etas",
        "0.01",
        "--beta",
        "0,0.9",
        "--T",
        "2000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("eig_eta0.01_beta0.9.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,dist"));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("eta0.01.beta0.9.iters_to_1e-3="));
}

#[test]
fn config_file_applies_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.cfg");
    std::fs::write(&config_path, "seed=9\nT=120\nbeta=0,0.5\n").unwrap();
    let out = heavyball(&[
        "phase",
        "--config",
        config_path.to_str().unwrap(),
        "--seed",
        "4", // overrides the file
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("seed=4"));
    assert!(std::fs::metadata(dir.path().join("o/phase_beta0.5.csv")).is_ok());
}

#[test]
fn unknown_config_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.cfg");
    std::fs::write(&config_path, "bogus_key=1\n").unwrap();
    let out = heavyball(&["phase", "--config", config_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus_key"));
}

#[test]
fn eig_rejects_switch_schedules() {
    let dir = tempfile::tempdir().unwrap();
    let out = heavyball(&[
        "eig",
        "--beta",
        "switch",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gradcheck_is_informational_without_tol_and_gates_with_it() {
    let dir = tempfile::tempdir().unwrap();
    // coarse h: larger error reported, still exit 0
    let out = heavyball(&[
        "gradcheck",
        "--h",
        "0.1",
        "--count",
        "20",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("phase.max_rel_err="));

    // same coarse h with a tight tolerance: violation, exit 1
    let out = heavyball(&[
        "gradcheck",
        "--h",
        "0.1",
        "--count",
        "20",
        "--tol",
        "1e-5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));

    // default fine h within the same tolerance: exit 0
    let out = heavyball(&[
        "gradcheck",
        "--count",
        "20",
        "--tol",
        "1e-5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
}

#[test]
fn lemmas_sweep_exits_clean() {
    let dir = tempfile::tempdir().unwrap();
    let out = heavyball(&[
        "lemmas",
        "--trials",
        "300",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("growth.violations=0"));
    assert!(stdout.contains("decay.violations=0"));
    assert!(stdout.contains("plus_one.violations=0"));
}

#[test]
fn out_dir_env_var_is_the_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_heavyball"))
        .args(["lemmas", "--trials", "50"])
        .env("HEAVYBALL_OUT", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(std::fs::metadata(dir.path().join("lemmas_summary.txt")).is_ok());
}

#[test]
fn stdout_summary_matches_summary_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = heavyball(&[
        "saddle",
        "--T",
        "500",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let file = std::fs::read_to_string(dir.path().join("saddle_summary.txt")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), file);
}
