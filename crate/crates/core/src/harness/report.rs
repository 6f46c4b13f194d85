//! Report emission: Markdown to stdout, machine CSVs to the output
//! directory.
//!
//! `summary.csv`, `runs.csv`, and `eigenvalues.csv` contain only
//! deterministic quantities and reproduce byte-identically under a fixed
//! seed; wall-times go to `timings.csv`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::harness::{ErrorReport, MethodStats};

fn fmt(v: f64) -> String {
    format!("{v:.9e}")
}

pub fn summary_csv(report: &ErrorReport) -> String {
    let mut out = String::from("model,method,l1_mean,l1_std,l2_mean,l2_std,coverage_mean\n");
    let mut row = |method: &str, s: &MethodStats| {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            report.label,
            method,
            fmt(s.l1_mean),
            fmt(s.l1_std),
            fmt(s.l2_mean),
            fmt(s.l2_std),
            fmt(s.coverage_mean),
        ));
    };
    row("AM", &report.am);
    row("AS", &report.as_baseline);
    out
}

pub fn runs_csv(report: &ErrorReport) -> String {
    let mut out = String::from(
        "model,split,am_seed,seed_point_index,retries,manifold_len,min_value_gap,max_step_dot,\
         converged,exited_cube,self_intersected,max_steps,coverage,am_l1,am_l2,as_l1,as_l2\n",
    );
    for r in &report.runs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            report.label,
            r.split,
            r.am_seed,
            r.seed_point_index,
            r.retries,
            r.manifold_len,
            fmt(r.min_value_gap),
            fmt(r.max_step_dot),
            r.converged,
            r.exited_cube,
            r.self_intersected,
            r.max_steps,
            fmt(r.coverage),
            fmt(r.am_l1),
            fmt(r.am_l2),
            fmt(r.as_l1),
            fmt(r.as_l2),
        ));
    }
    out
}

pub fn eigenvalues_csv(report: &ErrorReport) -> String {
    let mut out = String::from("index,lambda\n");
    for (i, l) in report.eigenvalues.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, fmt(*l)));
    }
    out
}

pub fn timings_csv(report: &ErrorReport) -> String {
    let mut out =
        String::from("model,split,am_seed,am_build_ms,am_project_ms,as_fit_ms,as_predict_ms\n");
    for r in &report.runs {
        out.push_str(&format!(
            "{},{},{},{:.3},{:.3},{:.3},{:.3}\n",
            report.label, r.split, r.am_seed, r.am_build_ms, r.am_project_ms, r.as_fit_ms,
            r.as_predict_ms,
        ));
    }
    out
}

/// Summary table in the shape of the regression result tables.
pub fn markdown_report(report: &ErrorReport) -> String {
    let mut out = format!(
        "### {} (test size {}, {} runs)\n\n",
        report.label,
        report.test_size,
        report.runs.len()
    );
    out.push_str("| method | l1 mean | l1 std | l2 mean | l2 std | n/N mean |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    for (name, s) in [("AM", &report.am), ("AS", &report.as_baseline)] {
        out.push_str(&format!(
            "| {} | {:.4e} | {:.4e} | {:.4e} | {:.4e} | {:.1}% |\n",
            name,
            s.l1_mean,
            s.l1_std,
            s.l2_mean,
            s.l2_std,
            100.0 * s.coverage_mean
        ));
    }
    out
}

/// Paths written by [`write_report`].
pub struct ReportFiles {
    pub summary: PathBuf,
    pub runs: PathBuf,
    pub eigenvalues: PathBuf,
    pub timings: PathBuf,
}

pub fn write_report(report: &ErrorReport, dir: &Path) -> Result<ReportFiles> {
    fs::create_dir_all(dir)?;
    let files = ReportFiles {
        summary: dir.join(format!("{}_summary.csv", report.label)),
        runs: dir.join(format!("{}_runs.csv", report.label)),
        eigenvalues: dir.join(format!("{}_eigenvalues.csv", report.label)),
        timings: dir.join(format!("{}_timings.csv", report.label)),
    };
    fs::write(&files.summary, summary_csv(report))?;
    fs::write(&files.runs, runs_csv(report))?;
    fs::write(&files.eigenvalues, eigenvalues_csv(report))?;
    fs::write(&files.timings, timings_csv(report))?;
    Ok(files)
}
