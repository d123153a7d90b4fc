//! End-to-end tests of the `patchlab` binary: exit codes, file outputs,
//! error reporting, and byte-level determinism across thread counts.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_patchlab")
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout should be utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr should be utf-8")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process should exit, not signal")
}

fn write_scenario(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("scenario.cfg");
    fs::write(&path, body).expect("scenario file should write");
    path
}

/// Number of data rows in a CSV: lines that are neither `#` comments nor
/// the single header line (the first non-comment line).
fn data_rows(path: &Path) -> usize {
    let text = fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{} should read: {e}", path.display()));
    let mut saw_header = false;
    let mut rows = 0;
    for line in text.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            saw_header = true;
            continue;
        }
        rows += 1;
    }
    assert!(saw_header, "{} should contain a header line", path.display());
    rows
}

const SMALL_FROZEN: &str = "\
model.kind = circular-patch
mode = frozen
alpha = 0.5
horizon = 0.2
dt = 2e-2
checkpoints = 3
markers.grid = 5
markers.cells = 6
window.x1_min = -2.1
window.x1_max = 2.1
window.x2_min = -2.1
window.x2_max = 2.1
y0.kind = rotational
seed = 9
";

#[test]
fn simulate_shipped_circular_patch() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = run(&[
        "simulate",
        "--scenario",
        shipped("circular_patch.cfg").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    // 5 checkpoints; 6x6 marker grid.
    assert_eq!(data_rows(&out_dir.join("records.csv")), 5);
    assert_eq!(data_rows(&out_dir.join("trajectories.csv")), 5 * 36);
}

#[test]
fn horizon_zero_yields_single_initial_record() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "model.kind = circular-patch\nmode = frozen\nalpha = 0.5\n\
         horizon = 0.0\ndt = 1e-3\nmarkers.grid = 3\ny0.kind = rotational\n",
    );
    let out_dir = dir.path().join("run");
    let out = run(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let records = fs::read_to_string(out_dir.join("records.csv")).unwrap();
    assert_eq!(data_rows(&out_dir.join("records.csv")), 1);
    let row = records
        .lines()
        .filter(|l| !l.starts_with('#'))
        .nth(1)
        .expect("one data row");
    assert!(row.starts_with("0.000000000000e0,"), "row: {row}");
}

#[test]
fn negative_dt_is_config_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "model.kind = circular-patch\nalpha = 0.5\nhorizon = 0.0\ndt = -1e-3\n",
    );
    let out_dir = dir.path().join("run");
    let out = run(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("dt"), "stderr: {}", stderr(&out));
    // Validation failure must leave no partial output behind.
    assert!(!out_dir.exists(), "no output directory should be created");
}

#[test]
fn unknown_key_error_names_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "model.kind = circular-patch\nalpha = 0.5\nhorizon = 0.0\ndt = 1e-3\nmodle.radius = 2\n",
    );
    let out = run(&["verify", "--scenario", scenario.to_str().unwrap(), "--suite", "stationary"]);
    assert_eq!(exit_code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("modle.radius"), "stderr: {err}");
    assert!(err.contains(":5"), "stderr should cite line 5: {err}");
}

#[test]
fn malformed_number_error_names_field_and_text() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "model.kind = circular-patch\nalpha = abc\nhorizon = 0.0\ndt = 1e-3\n",
    );
    let out = run(&["verify", "--scenario", scenario.to_str().unwrap(), "--suite", "stationary"]);
    assert_eq!(exit_code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("alpha") && err.contains("abc"), "stderr: {err}");
}

#[test]
fn duplicate_key_and_boundary_alpha_are_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let dup = write_scenario(
        dir.path(),
        "model.kind = circular-patch\nalpha = 0.5\nalpha = 0.6\nhorizon = 0.0\ndt = 1e-3\n",
    );
    let out = run(&["verify", "--scenario", dup.to_str().unwrap(), "--suite", "stationary"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("duplicate"), "stderr: {}", stderr(&out));

    let edge = write_scenario(
        dir.path(),
        "model.kind = circular-patch\nalpha = 1.0\nhorizon = 0.0\ndt = 1e-3\n",
    );
    let out = run(&["verify", "--scenario", edge.to_str().unwrap(), "--suite", "stationary"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("alpha"), "stderr: {}", stderr(&out));
}

#[test]
fn verify_stationary_passes_on_shipped_scenario() {
    let out = run(&[
        "verify",
        "--scenario",
        shipped("frozen_rotation.cfg").to_str().unwrap(),
        "--suite",
        "stationary",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("all 5 checks passed"), "stdout: {text}");
    assert!(!text.contains("FAIL"), "stdout: {text}");
}

#[test]
fn verify_identities_passes_on_shipped_scenario() {
    let out = run(&[
        "verify",
        "--scenario",
        shipped("gaussian_identity.cfg").to_str().unwrap(),
        "--suite",
        "identities",
    ]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("all 2 checks passed"), "stdout: {}", stdout(&out));
}

#[test]
fn verify_unknown_suite_is_usage_error() {
    let out = run(&[
        "verify",
        "--scenario",
        shipped("frozen_rotation.cfg").to_str().unwrap(),
        "--suite",
        "bogus",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("bogus"), "stderr: {}", stderr(&out));
}

#[test]
fn verify_stationary_rejects_smooth_model() {
    let out = run(&[
        "verify",
        "--scenario",
        shipped("gaussian_identity.cfg").to_str().unwrap(),
        "--suite",
        "stationary",
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("model.kind"), "stderr: {}", stderr(&out));
}

#[test]
fn lemmas_small_budget_passes() {
    let out = run(&["lemmas", "--budget", "120", "--seed", "5"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("reconstruction"), "stdout: {text}");
    assert!(text.contains("PASS") && !text.contains("FAIL"), "stdout: {text}");
}

#[test]
fn lemmas_zero_budget_is_empty_success() {
    let out = run(&["lemmas", "--budget", "0"]);
    assert_eq!(exit_code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("all 0 checks passed"), "stdout: {text}");
    assert!(!text.contains("PASS\n"), "no check rows expected: {text}");
}

#[test]
fn simulate_and_report_are_byte_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), SMALL_FROZEN);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for (out_dir, threads) in [(&out_a, "2"), (&out_b, "4")] {
        let sim = run(&[
            "simulate",
            "--scenario",
            scenario.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert_eq!(exit_code(&sim), 0, "stderr: {}", stderr(&sim));
        let rep = run(&[
            "report",
            "--scenario",
            scenario.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert_eq!(exit_code(&rep), 0, "stderr: {}", stderr(&rep));
    }
    for name in [
        "records.csv",
        "trajectories.csv",
        "timeseries.csv",
        "envelopes.csv",
        "refinement.csv",
    ] {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} should be byte-identical across thread counts");
    }
    // One report row per checkpoint; one refinement row per gradient route.
    assert_eq!(data_rows(&out_a.join("timeseries.csv")), 3);
    assert_eq!(data_rows(&out_a.join("refinement.csv")), 2);
}

#[test]
fn empty_marker_run_yields_header_only_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(
        dir.path(),
        "model.kind = circular-patch\nmode = frozen\nalpha = 0.5\n\
         horizon = 0.0\ndt = 1e-3\nmarkers.grid = 0\ny0.kind = rotational\n",
    );
    let out_dir = dir.path().join("run");
    let sim = run(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&sim), 0, "stderr: {}", stderr(&sim));
    assert_eq!(data_rows(&out_dir.join("records.csv")), 0);
    assert_eq!(data_rows(&out_dir.join("trajectories.csv")), 0);

    let rep = run(&[
        "report",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&rep), 0, "stderr: {}", stderr(&rep));
    for name in ["timeseries.csv", "envelopes.csv", "refinement.csv"] {
        assert_eq!(data_rows(&out_dir.join(name)), 0, "{name} should be header-only");
    }
}

#[test]
fn report_before_simulate_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = write_scenario(dir.path(), SMALL_FROZEN);
    let out_dir = dir.path().join("never-simulated");
    let out = run(&[
        "report",
        "--scenario",
        scenario.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("simulate"), "stderr: {}", stderr(&out));
}
