//! End-to-end checks of the binary: exit codes, file outputs and
//! reproducibility.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vtsim"))
}

fn short_config(dir: &Path) -> PathBuf {
    let path = dir.join("short.cfg");
    std::fs::write(
        &path,
        "duration_s = 20\nseed = 9\ntrajectory = static\ndefault_outages = false\nsettle_s = 1\n",
    )
    .unwrap();
    path
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("vtsim-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn validate_accepts_good_and_rejects_bad() {
    let dir = temp_dir("validate");
    let good = short_config(&dir);
    let status = bin().args(["validate", "--config"]).arg(&good).status().unwrap();
    assert_eq!(status.code(), Some(0));

    let bad = dir.join("bad.cfg");
    std::fs::write(&bad, "duration_s = -5\n").unwrap();
    let status = bin().args(["validate", "--config"]).arg(&bad).status().unwrap();
    assert_eq!(status.code(), Some(1));

    let unknown_key = dir.join("unknown.cfg");
    std::fs::write(&unknown_key, "frobnicate = 1\n").unwrap();
    let status = bin()
        .args(["validate", "--config"])
        .arg(&unknown_key)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    // missing file also counts as a config problem
    let status = bin()
        .args(["validate", "--config", "/nonexistent/nope.cfg"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn bad_arch_is_a_config_error() {
    let dir = temp_dir("arch");
    let cfg = short_config(&dir);
    let status = bin()
        .args(["run", "--arch", "warp-drive", "--out"])
        .arg(dir.join("out"))
        .arg("--config")
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn run_writes_expected_files() {
    let dir = temp_dir("run");
    let cfg = short_config(&dir);
    let out = dir.join("out");
    let status = bin()
        .args(["run", "--arch", "vdfll", "--plots", "--out"])
        .arg(&out)
        .arg("--config")
        .arg(&cfg)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for name in [
        "metrics.csv",
        "timeseries_vdfll.csv",
        "events_vdfll.csv",
        "position_error_vdfll.svg",
    ] {
        assert!(out.join(name).exists(), "{name} missing");
    }
    let metrics = std::fs::read_to_string(out.join("metrics.csv")).unwrap();
    assert!(metrics.starts_with("architecture,segment,field,mean,std\n"));
    // 20 s at 50 Hz: header plus 1001 rows
    let ts = std::fs::read_to_string(out.join("timeseries_vdfll.csv")).unwrap();
    assert_eq!(ts.lines().count(), 1 + 1001);
}

#[test]
fn compare_is_reproducible_and_joint() {
    let dir = temp_dir("compare");
    let cfg = short_config(&dir);
    let (out1, out2) = (dir.join("a"), dir.join("b"));
    for out in [&out1, &out2] {
        let status = bin()
            .args(["compare", "--out"])
            .arg(out)
            .arg("--config")
            .arg(&cfg)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    for name in [
        "metrics.csv",
        "timeseries_scalar1hz.csv",
        "timeseries_scalar50hz.csv",
        "timeseries_vdfll.csv",
    ] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    // all three architectures present in the joint metrics table
    let metrics = std::fs::read_to_string(out1.join("metrics.csv")).unwrap();
    for arch in ["scalar1hz", "scalar50hz", "vdfll"] {
        assert!(metrics.contains(arch));
    }
    // no plots were requested, none written
    assert!(!out1.join("position_error_vdfll.svg").exists());
}
