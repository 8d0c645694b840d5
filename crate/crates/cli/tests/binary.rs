mod common;

use std::path::Path;
use std::process::{Command, Output};

fn cdstate(dir: &Path, args: &[&str]) -> Output {
    let config = dir.join("small.toml");
    if !config.exists() {
        std::fs::write(&config, common::SMALL_TOML).unwrap();
    }
    Command::new(env!("CARGO_BIN_EXE_cdstate"))
        .arg("--config")
        .arg(&config)
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn bench_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let o = cdstate(dir.path(), &["bench", "--out", "run"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("MAPE_x"));
    let run = dir.path().join("run");
    for name in ["truth.csv", "record.csv", "summary.txt", "summary.csv"] {
        assert!(run.join(name).exists(), "{name}");
    }
    for kind in ["ekf", "ukf", "enkf", "pf"] {
        assert!(run.join(format!("estimates_{kind}.csv")).exists());
    }
}

#[test]
fn simulate_then_estimate_equals_bench() {
    let dir = tempfile::tempdir().unwrap();
    assert!(cdstate(dir.path(), &["bench", "--out", "a", "--seed", "4"]).status.success());
    assert!(cdstate(dir.path(), &["simulate", "--out", "b", "--seed", "4"]).status.success());
    let o = cdstate(dir.path(), &["estimate", "--out", "b", "--seed", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = cdstate(dir.path(), &["estimate", "--out", "c", "--truth", "b/truth.csv", "--seed", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for name in ["record.csv", "estimates_ukf.csv", "estimates_enkf.csv"] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        assert_eq!(a, std::fs::read(dir.path().join("b").join(name)).unwrap(), "{name}");
        assert_eq!(a, std::fs::read(dir.path().join("c").join(name)).unwrap(), "{name}");
    }
}

#[test]
fn filter_selection_and_particle_dump() {
    let dir = tempfile::tempdir().unwrap();
    let o = cdstate(dir.path(), &["bench", "--out", "r", "--filters", "pf", "--dump-particles"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = dir.path().join("r");
    assert!(r.join("estimates_pf.csv").exists());
    assert!(r.join("particles_pf.csv").exists());
    assert!(!r.join("estimates_ekf.csv").exists());
    assert_eq!(std::fs::read_to_string(r.join("summary.csv")).unwrap().lines().count(), 2);
}

#[test]
fn errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = cdstate(dir.path(), &["bench", "--filters", "kf"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown filter"));
    let o = cdstate(dir.path(), &["estimate", "--out", "nothing"]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(dir.path().join("bad.toml"), "samples = -1\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cdstate"))
        .args(["--config", "bad.toml", "simulate"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_reports_every_reference_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = cdstate(dir.path(), &["check"]);
    let out = stdout(&o);
    for name in ["jacobians", "linear-oracle", "joseph-form", "monte-carlo", "resampling", "ou-variance"] {
        assert!(out.contains(&format!("PASS {name}:")), "{out}");
    }
    assert!(o.status.success());
}
