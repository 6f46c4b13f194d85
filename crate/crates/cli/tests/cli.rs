//! End-to-end checks of the `am` binary: artifacts, stdout shapes, and the
//! exit-code contract (0 success, 2 degenerate input).

use std::path::Path;
use std::process::Command;

fn am() -> Command {
    Command::new(env!("CARGO_BIN_EXE_am"))
}

fn write_constant_csv(path: &Path) {
    let mut csv = String::from("x1,x2,f,g1,g2\n");
    for i in 0..5 {
        for j in 0..5 {
            csv.push_str(&format!(
                "{},{},1.0,0.0,0.0\n",
                -1.0 + 0.5 * i as f64,
                -1.0 + 0.5 * j as f64
            ));
        }
    }
    std::fs::write(path, csv).unwrap();
}

#[test]
fn build_writes_the_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = am()
        .args(["build", "--function", "f3", "--grid", "40"])
        .args(["--seed-point", "0.1,0.1"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifold = std::fs::read_to_string(dir.path().join("f3_manifold.csv")).unwrap();
    assert!(manifold.starts_with("t,x1,x2,f\n"));
    let spline = std::fs::read_to_string(dir.path().join("f3_spline.csv")).unwrap();
    assert!(spline.starts_with("t,fhat\n"));
    let eig = std::fs::read_to_string(dir.path().join("f3_eigenvalues.csv")).unwrap();
    assert!(eig.starts_with("index,lambda\n"));
}

#[test]
fn project_reports_estimates_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = am()
        .args(["project", "--function", "f1", "--grid", "100"])
        .args(["--seed-point", "0,0", "--point", "0.5,0.25"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("converged"), "{stdout}");
    let trace = std::fs::read_to_string(dir.path().join("f1_trace_0.csv")).unwrap();
    assert!(trace.starts_with("step,x1,x2,status\n"));
    assert!(trace.trim_end().ends_with("converged"));
}

#[test]
fn regress_emits_markdown_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = am()
        .args(["regress", "--function", "f3", "--grid", "25"])
        .args(["--splits", "1", "--am-seeds", "1"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("| AM |") && stdout.contains("| AS |"), "{stdout}");
    for file in ["f3_summary.csv", "f3_runs.csv", "f3_eigenvalues.csv", "f3_timings.csv"] {
        assert!(dir.path().join(file).exists(), "missing {file}");
    }
}

#[test]
fn csv_input_drives_regress() {
    let dir = tempfile::tempdir().unwrap();
    // a smooth scattered dataset: f = x + 2y on a coarse grid
    let mut csv = String::from("x1,x2,f,g1,g2\n");
    for i in 0..15 {
        for j in 0..15 {
            let x = -1.0 + 2.0 * i as f64 / 14.0;
            let y = -1.0 + 2.0 * j as f64 / 14.0;
            csv.push_str(&format!("{x},{y},{},1.0,2.0\n", x + 2.0 * y));
        }
    }
    let data = dir.path().join("plane.csv");
    std::fs::write(&data, csv).unwrap();
    let out = am()
        .args(["regress", "--csv"])
        .arg(&data)
        .args(["--delta", "0.25", "--epsilon", "0.15"])
        .args(["--splits", "1", "--am-seeds", "1"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("plane_summary.csv").exists());
}

#[test]
fn csv_without_step_sizes_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("x.csv");
    std::fs::write(&data, "x1,f,g1\n0.0,0.0,1.0\n0.5,0.5,1.0\n").unwrap();
    let out = am()
        .args(["regress", "--csv"])
        .arg(&data)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn degenerate_data_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("constant.csv");
    write_constant_csv(&data);
    let out = am()
        .args(["regress", "--csv"])
        .arg(&data)
        .args(["--delta", "0.6", "--epsilon", "0.5"])
        .args(["--splits", "1", "--am-seeds", "1"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(2),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn sense_writes_profile_segments_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = am()
        .args(["sense", "--function", "f3", "--grid", "40"])
        .args(["--delta", "0.05", "--epsilon", "0.05"])
        .args(["--seed-point", "0,0"])
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("ranking"), "{stdout}");
    let profile = std::fs::read_to_string(dir.path().join("f3_profile.csv")).unwrap();
    assert!(profile.starts_with("t,x,y\n"));
    assert!(dir.path().join("f3_profile.svg").exists());
    assert!(dir.path().join("f3_segments.md").exists());
}

#[test]
fn bench_prints_the_ratio_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = am().arg("bench").arg("--out").arg(dir.path()).output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("AM/AS"), "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9); // header + 8 combos
}

#[test]
fn unknown_model_is_a_plain_failure() {
    let out = am()
        .args(["build", "--function", "nope"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown model"));
}
