use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Steps discarded before timing statistics are taken.
pub const WARMUP_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub mean_ms: f64,
    pub std_ms: f64,
    pub steps: usize,
}

/// Mean and sample standard deviation of `times_ms[warmup..]`.
pub fn timing_stats(times_ms: &[f64], warmup: usize) -> Result<TimingStats> {
    let kept = times_ms.get(warmup..).unwrap_or(&[]);
    if kept.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{} timing samples leave nothing after {warmup} warm-up steps",
            times_ms.len()
        )));
    }
    let n = kept.len() as f64;
    let mean = kept.iter().sum::<f64>() / n;
    let var = if kept.len() > 1 {
        kept.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(TimingStats {
        mean_ms: mean,
        std_ms: var.sqrt(),
        steps: kept.len(),
    })
}
