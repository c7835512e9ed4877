//! Files written by a run: one CSV per successful trial, `metrics.json`
//! (deterministic), `timing.json` (wall-clock, machine dependent) and the
//! gain used.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::experiment::{ExperimentReport, TrialSeries};
use crate::error::Result;
use crate::synthesis::gain_file::format_matrix;
use nalgebra::DMatrix;

pub const CSV_HEADER: &str =
    "t,phi_true,theta_true,psi_true,phi_eh2,theta_eh2,psi_eh2,phi_ekf,theta_ekf,psi_ekf";

pub fn trial_csv(series: &TrialSeries) -> String {
    let mut out = String::with_capacity(series.times.len() * 240);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for k in 0..series.times.len() {
        let _ = write!(out, "{:.16e}", series.times[k]);
        for e in [&series.truth[k], &series.eh2[k], &series.ekf[k]] {
            let _ = write!(out, ",{:.16e},{:.16e},{:.16e}", e.phi, e.theta, e.psi);
        }
        out.push('\n');
    }
    out
}

pub fn trial_file_name(index: usize) -> String {
    format!("trial_{index:03}.csv")
}

/// Writes all run outputs into `dir`, creating it if needed.
pub fn write_outputs(
    report: &ExperimentReport,
    gain: &DMatrix<f64>,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut put = |name: String, contents: String| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, contents)?;
        written.push(path);
        Ok(())
    };
    for (index, data) in report.successes() {
        put(trial_file_name(index), trial_csv(&data.series))?;
    }
    let metrics = serde_json::to_string_pretty(&report.summary()).expect("summary serializes");
    put("metrics.json".into(), metrics + "\n")?;
    if let Some(timing) = report.timing() {
        let text = serde_json::to_string_pretty(&timing).expect("timing serializes");
        put("timing.json".into(), text + "\n")?;
    }
    put("gain.txt".into(), format_matrix(gain))?;
    put("config.json".into(), report.config.to_json() + "\n")?;
    Ok(written)
}
