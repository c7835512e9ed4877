use serde::{Deserialize, Serialize};

use super::timing::TimingStats;
use crate::error::{Error, Result};
use crate::kinematics::{angle_error, EulerAngles};

/// Per-axis accuracy of one filter over one trial, in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub rms: [f64; 3],
    pub err_min: [f64; 3],
    pub err_max: [f64; 3],
    /// Samples remaining after the exclusion window.
    pub samples: usize,
    /// Per-step wall-clock statistics; absent from deterministic outputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingStats>,
    pub seed: u64,
    pub config_hash: String,
}

impl RunMetrics {
    pub fn without_timing(&self) -> Self {
        Self {
            timing: None,
            ..self.clone()
        }
    }
}

/// Error statistics of `estimates - truth` (wrapped per axis) over samples
/// with `t - times[0] >= exclude_initial`.
pub fn compute_metrics(
    times: &[f64],
    truth: &[EulerAngles],
    estimates: &[EulerAngles],
    exclude_initial: f64,
) -> Result<RunMetrics> {
    if truth.len() != estimates.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: estimates.len(),
        });
    }
    if times.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: times.len(),
            right: truth.len(),
        });
    }
    let Some(&t0) = times.first() else {
        return Err(Error::InvalidParameter("empty series".into()));
    };
    let mut sum_sq = [0.0; 3];
    let mut err_min = [f64::INFINITY; 3];
    let mut err_max = [f64::NEG_INFINITY; 3];
    let mut samples = 0;
    for ((t, tr), est) in times.iter().zip(truth).zip(estimates) {
        if t - t0 < exclude_initial {
            continue;
        }
        let err = angle_error(est, tr);
        for axis in 0..3 {
            let e = err[axis].to_degrees();
            sum_sq[axis] += e * e;
            err_min[axis] = err_min[axis].min(e);
            err_max[axis] = err_max[axis].max(e);
        }
        samples += 1;
    }
    if samples == 0 {
        return Err(Error::InvalidParameter(format!(
            "no samples remain after excluding the first {exclude_initial} s"
        )));
    }
    Ok(RunMetrics {
        rms: sum_sq.map(|s| (s / samples as f64).sqrt()),
        err_min,
        err_max,
        samples,
        timing: None,
        seed: 0,
        config_hash: String::new(),
    })
}

/// Order-independent mean: values are sorted before summation.
pub fn stable_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.iter().sum::<f64>() / sorted.len() as f64
}
