//! Exit codes and outputs of the `renarea` binary.

use std::path::PathBuf;
use std::process::Command;

fn renarea(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_renarea")).args(args).env_remove("RENAREA_JOBS").output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("renarea-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(renarea(&["verify", "--bogus", "1"]).0, 2);
    assert_eq!(renarea(&["lambda-c", "--curve", "fourier", "--eps", "-1"]).0, 2);
    assert_eq!(renarea(&["lambda-c", "--curve", "spiral"]).0, 2);
    assert_eq!(renarea(&["solve", "--max-s", "1.5"]).0, 2);
    let bad_jobs = Command::new(env!("CARGO_BIN_EXE_renarea"))
        .args(["cone-check"])
        .env("RENAREA_JOBS", "many")
        .output()
        .unwrap();
    assert_eq!(bad_jobs.status.code(), Some(2));
}

#[test]
fn config_file_unknown_key_is_a_usage_error() {
    let d = scratch("cfg");
    std::fs::create_dir_all(&d).unwrap();
    let cfg = d.join("run.cfg");
    std::fs::write(&cfg, "curve = great-circle\nwobble = 3\n").unwrap();
    assert_eq!(renarea(&["lambda-c", "--config", cfg.to_str().unwrap()]).0, 2);
}

#[test]
fn cone_check_passes() {
    let d = scratch("cone");
    let (code, stdout) = renarea(&["cone-check", "--theta", "1", "--rho", "2", "--out", d.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.lines().all(|l| !l.starts_with("FAIL")));
    assert!(d.join("cone_check.json").exists());
}

#[test]
fn latitude_lambda_c_is_round() {
    let d = scratch("lat");
    let (code, stdout) = renarea(&["lambda-c", "--curve", "latitude", "--theta", "1.0472", "--out", d.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("lambda_c.json")).unwrap()).unwrap();
    let lc = json["lambda_c"].as_f64().unwrap();
    assert!((lc - 2.0 * std::f64::consts::PI).abs() < 1e-4, "{lc}");
}

#[test]
fn short_schedule_is_inconclusive() {
    let d = scratch("short");
    let (code, stdout) = renarea(&[
        "verify",
        "--curve",
        "fourier",
        "--max-s",
        "0.95",
        "--boundary-samples",
        "48",
        "--radial-step",
        "0.4",
        "--checks",
        "theorem",
        "--out",
        d.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("Inconclusive"), "{stdout}");
    assert!(d.join("report.json").exists());
}

#[test]
fn solve_writes_mesh() {
    let d = scratch("solve");
    let (code, stdout) = renarea(&[
        "solve",
        "--curve",
        "fourier",
        "--eps",
        "0.1",
        "--max-s",
        "0.999",
        "--boundary-samples",
        "48",
        "--radial-step",
        "0.4",
        "--out",
        d.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{stdout}");
    let off = std::fs::read_to_string(d.join("surface.off")).unwrap();
    assert!(off.starts_with("OFF"));
    assert!(d.join("series.csv").exists());
}
