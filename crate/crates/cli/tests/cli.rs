use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn eh2(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eh2"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, edit: impl FnOnce(&mut Value)) -> String {
    let mut cfg: Value = serde_json::from_str(&default_config()).unwrap();
    edit(&mut cfg);
    let path = dir.join("cfg.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

fn default_config() -> String {
    json!({
        "case_id": "II",
        "duration": 2.0,
        "imu_rate": 100.0,
        "angular_speed": std::f64::consts::FRAC_PI_3,
        "amplitude_deg": [60.0, 60.0, 60.0],
        "profile": "simultaneous",
        "noise": {"n_w": 0.005, "n_b": 1e-4, "n_a": 0.02, "n_m": 0.005},
        "world": {"g_inertial": [0.0, 0.0, 9.81], "h_inertial": [0.48, 0.0, 0.58]},
        "seed": 3,
        "num_trials": 2,
        "exclude_initial": 0.5
    })
    .to_string()
}

#[test]
fn synthesize_writes_six_by_six_gain() {
    let dir = tempfile::tempdir().unwrap();
    let out = eh2(&[
        "synthesize",
        "--case",
        "I",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("gain.txt")).unwrap();
    let rows: Vec<_> = text.lines().collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.split(' ').count() == 6));

    let stdout = eh2(&["synthesize", "--case", "I"]);
    assert_eq!(String::from_utf8(stdout.stdout).unwrap(), text);
}

#[test]
fn run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = eh2(&[
        "run",
        "--case",
        "II",
        "--trials",
        "2",
        "--seed",
        "5",
        "--exclude-initial",
        "2",
        "--out",
        d,
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "trial_000.csv",
        "trial_001.csv",
        "metrics.json",
        "timing.json",
        "gain.txt",
        "config.json",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let csv = std::fs::read_to_string(dir.path().join("trial_000.csv")).unwrap();
    assert!(csv.starts_with(
        "t,phi_true,theta_true,psi_true,phi_eh2,theta_eh2,psi_eh2,phi_ekf,theta_ekf,psi_ekf\n"
    ));
    let metrics: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap())
            .unwrap();
    assert_eq!(metrics["seed"], 5);
    assert_eq!(metrics["num_trials"], 2);

    let report = eh2(&["report", "--out", d]);
    assert_eq!(code(&report), 0);
    let text = String::from_utf8(report.stdout).unwrap();
    assert!(
        text.contains("eH2") && text.contains("EKF") && text.contains("2/2 trials ok"),
        "{text}"
    );
}

#[test]
fn config_file_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |_| {});
    let out_dir = dir.path().join("out");
    let out = eh2(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(out_dir.join("trial_001.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 201);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write_config(dir.path(), |v| v["extra"] = json!(true));
    assert_eq!(
        code(&eh2(&[
            "run",
            "--config",
            &unknown,
            "--out",
            dir.path().to_str().unwrap()
        ])),
        1
    );
    assert_eq!(code(&eh2(&["run", "--case", "I", "--trials", "0"])), 1);
    assert_eq!(code(&eh2(&["synthesize", "--case", "III"])), 1);
    assert_eq!(
        code(&eh2(&[
            "report",
            "--out",
            dir.path().join("missing").to_str().unwrap()
        ])),
        1
    );
}

#[test]
fn noise_free_design_fails_synthesis() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), |v| {
        v["noise"] = json!({"n_w": 0.0, "n_b": 0.0, "n_a": 0.0, "n_m": 0.0});
    });
    let out = eh2(&["synthesize", "--config", &cfg]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn all_trials_failing_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // A huge pitch-rate bias throws every filter into the gimbal guard.
    let cfg = write_config(dir.path(), |v| {
        v["initial_bias"] = json!([0.0, 1000.0, 0.0])
    });
    let out_dir = dir.path().join("out");
    let out = eh2(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
    let metrics: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("metrics.json")).unwrap())
            .unwrap();
    assert_eq!(metrics["trials_ok"], 0);
    assert_eq!(metrics["failures"].as_array().unwrap().len(), 2);
}

#[test]
fn bench_reports_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = eh2(&[
        "bench",
        "--case",
        "II",
        "--steps",
        "2000",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout)
        .unwrap()
        .contains("ratio eH2/EKF"));
    let bench: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bench.json")).unwrap())
            .unwrap();
    assert!(bench["timing"]["eh2"]["steps"].as_u64().unwrap() >= 2000);
}
