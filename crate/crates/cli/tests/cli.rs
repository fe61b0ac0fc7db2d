//! End-to-end checks of the binary: determinism across worker counts,
//! config handling, output schemas and exit codes.

use std::fs;
use std::path::Path;
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cavity-ps"))
}

/// A small, fast parameter set for binary round trips.
fn small_args(out: &Path) -> Vec<String> {
    vec![
        "--alpha".into(),
        "1.0".into(),
        "--atoms".into(),
        "1,2".into(),
        "--r-min".into(),
        "0".into(),
        "--r-max".into(),
        "0.3".into(),
        "--r-step".into(),
        "0.1".into(),
        "--out".into(),
        out.display().to_string(),
    ]
}

#[test]
fn sweep_output_is_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for (jobs, sub) in [("1", "a"), ("4", "b"), ("2", "c")] {
        let out = dir.path().join(sub);
        let status = binary()
            .args(small_args(&out))
            .args(["--jobs", jobs, "sweep"])
            .status()
            .unwrap();
        assert!(status.success());
        bytes.push(fs::read(out.join("sweep_metrics.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
    assert_eq!(bytes[1], bytes[2]);
}

#[test]
fn repeated_runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for sub in ["x", "y"] {
        let out = dir.path().join(sub);
        let status = binary()
            .args(small_args(&out))
            .arg("prob")
            .status()
            .unwrap();
        assert!(status.success());
        bytes.push(fs::read(out.join("success_probability.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn sweep_csv_has_the_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cols");
    assert!(binary().args(small_args(&out)).arg("sweep").status().unwrap().success());
    let text = fs::read_to_string(out.join("sweep_metrics.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "r,N,variance,squeezing_db,mandel_q,mean_n,P_N");
    // 4 r values x 2 atom counts
    assert_eq!(lines.count(), 8);
    // r = 0 rows: variance 1, P = 1
    let first = text.lines().nth(1).unwrap();
    let fields: Vec<&str> = first.split(',').collect();
    assert_eq!(fields[0], "0.00000000000e0");
    assert_eq!(fields[2], "1.00000000000e0");
    assert_eq!(fields[6], "1.00000000000e0");
}

#[test]
fn config_file_round_trips_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("run.conf");
    let config = cavity_ps_cli::config::SweepConfig {
        alpha: num_complex::Complex64::new(1.25, 0.0),
        atoms: vec![3],
        r_min: 0.0,
        r_max: 0.2,
        r_step: 0.2,
        out_dir: dir.path().join("from_config"),
        ..Default::default()
    };
    fs::write(&config_path, config.serialize()).unwrap();
    let status = binary()
        .args(["--config", config_path.to_str().unwrap()])
        .arg("prob")
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(dir.path().join("from_config/success_probability.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",3,"));

    // flag overrides the config's atom list
    let status = binary()
        .args(["--config", config_path.to_str().unwrap()])
        .args(["--atoms", "4", "--out"])
        .arg(dir.path().join("overridden"))
        .arg("prob")
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(dir.path().join("overridden/success_probability.csv")).unwrap();
    assert!(text.lines().nth(1).unwrap().contains(",4,"));
}

#[test]
fn state_dump_matches_the_field_state_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("state");
    let status = binary()
        .args(small_args(&out))
        .args(["state", "--r", "0.7", "--n", "2"])
        .status()
        .unwrap();
    assert!(status.success());
    let text = fs::read_to_string(out.join("state_r0.7_N2.json")).unwrap();
    let state = cavity_ps::FieldState::from_json(&text).unwrap();
    assert!(state.is_normalized());
}

#[test]
fn wigner_job_writes_grid_and_summary_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("wigner");
    let status = binary()
        .args(small_args(&out))
        .args(["wigner", "--r", "0.4", "--n", "1"])
        .status()
        .unwrap();
    assert!(status.success());
    assert!(out.join("wigner_r0.4_N1.csv").exists());
    let summary: cavity_ps::WignerSummary = serde_json::from_str(
        &fs::read_to_string(out.join("wigner_r0.4_N1.json")).unwrap(),
    )
    .unwrap();
    assert!((summary.total_integral - 1.0).abs() < 2e-3);
}

#[test]
fn exit_codes_distinguish_config_and_numerical_failures() {
    let dir = tempfile::tempdir().unwrap();
    // config error: negative step
    let status = binary()
        .args(["--r-step", "-0.1", "--out"])
        .arg(dir.path())
        .arg("prob")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    // numerical error: cutoff starves the coherent state
    let status = binary()
        .args(["--alpha", "3.1622776601683795", "--cutoff", "20", "--out"])
        .arg(dir.path())
        .args(["state", "--r", "0.5", "--n", "1"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
    // unknown config key
    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "nonsense = 1\n").unwrap();
    let status = binary()
        .args(["--config", bad.to_str().unwrap()])
        .arg("prob")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
}
