use std::time::Instant;

use nalgebra::{Matrix6, Vector3};
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::metrics::{compute_metrics, stable_mean, RunMetrics};
use super::timing::{timing_stats, TimingStats, WARMUP_STEPS};
use super::trajectory::{generate_trajectory, Trajectory};
use crate::dynamics::EulerState;
use crate::error::{Error, Result};
use crate::filters::{
    default_initial_covariance, initialize_from_first_sample, Eh2Filter, EkfState,
};
use crate::kinematics::EulerAngles;
use crate::linearization::nominal_model;
use crate::sensors::{
    simulate_accel, simulate_gyro, simulate_mag, step_bias, ImuSample, NoiseParams, WorldConstants,
};
use crate::synthesis::{synthesize_gain, GainCertificate};
use crate::RandomSource;

/// Independent random stream for trial `index` of a seeded experiment.
pub fn trial_rng(seed: u64, index: usize) -> RandomSource {
    let mut rng = RandomSource::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorStream {
    pub samples: Vec<ImuSample>,
    /// True gyro bias in effect at each sample.
    pub bias: Vec<Vector3<f64>>,
}

/// Noisy gyro/accel/mag readings along a trajectory. The bias starts at
/// `cfg.initial_bias` and random-walks between samples.
pub fn simulate_stream(
    cfg: &ScenarioConfig,
    traj: &Trajectory,
    rng: &mut RandomSource,
) -> SensorStream {
    let n = traj.len();
    let mut samples = Vec::with_capacity(n);
    let mut biases = Vec::with_capacity(n);
    let mut bias = cfg.initial_bias();
    for k in 0..n {
        let e = &traj.attitude[k];
        samples.push(ImuSample {
            t: traj.times[k],
            omega_m: simulate_gyro(&traj.body_rate[k], &bias, &cfg.noise, rng),
            a_m: simulate_accel(e, &cfg.world, &cfg.noise, rng),
            m_m: simulate_mag(e, &cfg.world, &cfg.noise, rng),
        });
        biases.push(bias);
        if k + 1 < n {
            bias = step_bias(&bias, &cfg.noise, traj.times[k + 1] - traj.times[k], rng);
        }
    }
    SensorStream {
        samples,
        bias: biases,
    }
}

/// Everything both filters need besides the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSetup {
    pub gain: Matrix6<f64>,
    pub world: WorldConstants,
    pub noise: NoiseParams,
    pub initial_covariance: Matrix6<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterRun {
    pub eh2: Vec<EulerAngles>,
    pub ekf: Vec<EulerAngles>,
    pub eh2_ms: Vec<f64>,
    pub ekf_ms: Vec<f64>,
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64() * 1e3)
}

/// Runs both filters over `samples`. Each step consumes the sample at its
/// end time. The filters start from `init`, or from the first sample when
/// `None`. Which filter goes first alternates every step.
pub fn run_filters(
    samples: &[ImuSample],
    setup: &FilterSetup,
    init: Option<EulerState>,
) -> Result<FilterRun> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty sensor stream".into()))?;
    let x0 = match init {
        Some(x) => x,
        None => initialize_from_first_sample(first, &setup.world)?,
    };
    let mut eh2 = Eh2Filter::new(x0, setup.gain)?;
    let mut ekf = EkfState::with_covariance(x0, setup.initial_covariance);
    let n = samples.len();
    let mut run = FilterRun {
        eh2: Vec::with_capacity(n),
        ekf: Vec::with_capacity(n),
        eh2_ms: Vec::with_capacity(n.saturating_sub(1)),
        ekf_ms: Vec::with_capacity(n.saturating_sub(1)),
    };
    run.eh2.push(eh2.estimate());
    run.ekf.push(ekf.xhat.attitude);
    for (k, pair) in samples.windows(2).enumerate() {
        let sample = &pair[1];
        let dt = sample.t - pair[0].t;
        let step_eh2 = |f: &Eh2Filter| timed(|| f.step(sample, &setup.world, dt));
        let step_ekf = |f: &EkfState| timed(|| f.step(sample, &setup.world, &setup.noise, dt));
        let ((next_eh2, t_eh2), (next_ekf, t_ekf)) = if k % 2 == 0 {
            let a = step_eh2(&eh2);
            (a, step_ekf(&ekf))
        } else {
            let b = step_ekf(&ekf);
            (step_eh2(&eh2), b)
        };
        eh2 = next_eh2
            .map_err(|e| Error::InvalidParameter(format!("eh2 filter at t = {}: {e}", sample.t)))?;
        ekf = next_ekf
            .map_err(|e| Error::InvalidParameter(format!("ekf at t = {}: {e}", sample.t)))?;
        run.eh2.push(eh2.estimate());
        run.ekf.push(ekf.xhat.attitude);
        run.eh2_ms.push(t_eh2);
        run.ekf_ms.push(t_ekf);
    }
    Ok(run)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSeries {
    pub times: Vec<f64>,
    pub truth: Vec<EulerAngles>,
    pub eh2: Vec<EulerAngles>,
    pub ekf: Vec<EulerAngles>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialData {
    pub series: TrialSeries,
    pub eh2: RunMetrics,
    pub ekf: RunMetrics,
    pub eh2_ms: Vec<f64>,
    pub ekf_ms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub index: usize,
    /// Failed trials keep their error message instead of being dropped.
    pub outcome: std::result::Result<TrialData, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    /// Trials spread over the rayon pool; same as `Sequential` when the
    /// `parallel` feature is off.
    Parallel,
}

impl Default for ExecMode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

fn map_trials<T, F>(n: usize, mode: ExecMode, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// A validated scenario with its gain and reference trajectory.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: ScenarioConfig,
    pub certificate: GainCertificate,
    pub trajectory: Trajectory,
    pub setup: FilterSetup,
    config_hash: String,
}

impl Experiment {
    /// Fails with `Config` for invalid scenarios and `SynthesisFailure` when
    /// no certified gain exists for the filter noise model.
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let trajectory = generate_trajectory(&config)?;
        let noise = config.filter_noise();
        let model =
            nominal_model(&noise, &config.world).map_err(|e| Error::Config(e.to_string()))?;
        let certificate = synthesize_gain(&model).map_err(|e| match e {
            Error::SynthesisFailure(_) => e,
            other => Error::SynthesisFailure(other.to_string()),
        })?;
        if !certificate.lmi_feasible {
            return Err(Error::SynthesisFailure(format!(
                "gain fails the LMI check: {:?}",
                certificate.lmi
            )));
        }
        let setup = FilterSetup {
            gain: certificate.gain6()?,
            world: config.world,
            noise,
            initial_covariance: default_initial_covariance(),
        };
        let config_hash = config.config_hash();
        Ok(Self {
            config,
            certificate,
            trajectory,
            setup,
            config_hash,
        })
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn stream(&self, index: usize) -> SensorStream {
        let mut rng = trial_rng(self.config.seed, index);
        simulate_stream(&self.config, &self.trajectory, &mut rng)
    }

    fn try_trial(&self, index: usize) -> Result<TrialData> {
        let stream = self.stream(index);
        let run = run_filters(&stream.samples, &self.setup, None)?;
        let times = &self.trajectory.times;
        let truth = &self.trajectory.attitude;
        let tag = |mut m: RunMetrics, ms: &[f64]| {
            m.seed = self.config.seed;
            m.config_hash = self.config_hash.clone();
            m.timing = timing_stats(ms, WARMUP_STEPS.min(ms.len().saturating_sub(1))).ok();
            m
        };
        let eh2 = tag(
            compute_metrics(times, truth, &run.eh2, self.config.exclude_initial)?,
            &run.eh2_ms,
        );
        let ekf = tag(
            compute_metrics(times, truth, &run.ekf, self.config.exclude_initial)?,
            &run.ekf_ms,
        );
        Ok(TrialData {
            series: TrialSeries {
                times: times.clone(),
                truth: truth.clone(),
                eh2: run.eh2,
                ekf: run.ekf,
            },
            eh2,
            ekf,
            eh2_ms: run.eh2_ms,
            ekf_ms: run.ekf_ms,
        })
    }

    pub fn run_trial(&self, index: usize) -> TrialRecord {
        TrialRecord {
            index,
            outcome: self.try_trial(index).map_err(|e| e.to_string()),
        }
    }

    pub fn run(&self, mode: ExecMode) -> ExperimentReport {
        let trials = map_trials(self.config.num_trials, mode, |i| self.run_trial(i));
        ExperimentReport {
            config: self.config.clone(),
            config_hash: self.config_hash.clone(),
            gain_h2_norm: self.certificate.h2_norm,
            trials,
        }
    }
}

/// Runs every trial of `cfg` with the default execution mode.
pub fn run_experiment(cfg: &ScenarioConfig) -> Result<ExperimentReport> {
    Ok(Experiment::new(cfg.clone())?.run(ExecMode::default()))
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ScenarioConfig,
    pub config_hash: String,
    pub gain_h2_norm: f64,
    pub trials: Vec<TrialRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSummary {
    /// Mean over successful trials of the per-trial RMS (degrees).
    pub mean_rms: [f64; 3],
    /// Extreme signed errors over all successful trials (degrees).
    pub err_min: [f64; 3],
    pub err_max: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub index: usize,
    pub eh2: RunMetrics,
    pub ekf: RunMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub index: usize,
    pub error: String,
}

/// Deterministic summary written as `metrics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub config_hash: String,
    pub seed: u64,
    pub num_trials: usize,
    pub trials_ok: usize,
    pub gain_h2_norm: f64,
    /// Successful trials where the eH₂ yaw RMS beats the EKF's.
    pub eh2_yaw_wins: usize,
    pub eh2: Option<FilterSummary>,
    pub ekf: Option<FilterSummary>,
    pub trials: Vec<TrialMetrics>,
    pub failures: Vec<TrialFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingComparison {
    pub eh2: TimingStats,
    pub ekf: TimingStats,
    /// `eh2.mean_ms / ekf.mean_ms`.
    pub ratio: f64,
}

impl TimingComparison {
    pub fn new(eh2: TimingStats, ekf: TimingStats) -> Self {
        Self {
            eh2,
            ekf,
            ratio: eh2.mean_ms / ekf.mean_ms,
        }
    }
}

fn summarize(metrics: &[&RunMetrics]) -> Option<FilterSummary> {
    if metrics.is_empty() {
        return None;
    }
    let per_axis =
        |f: &dyn Fn(&RunMetrics) -> f64| metrics.iter().map(|m| f(m)).collect::<Vec<_>>();
    let mut out = FilterSummary {
        mean_rms: [0.0; 3],
        err_min: [0.0; 3],
        err_max: [0.0; 3],
    };
    for axis in 0..3 {
        out.mean_rms[axis] = stable_mean(&per_axis(&|m| m.rms[axis]));
        out.err_min[axis] = per_axis(&|m| m.err_min[axis])
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        out.err_max[axis] = per_axis(&|m| m.err_max[axis])
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max);
    }
    Some(out)
}

impl ExperimentReport {
    pub fn successes(&self) -> impl Iterator<Item = (usize, &TrialData)> {
        self.trials
            .iter()
            .filter_map(|t| t.outcome.as_ref().ok().map(|d| (t.index, d)))
    }

    pub fn trials_ok(&self) -> usize {
        self.successes().count()
    }

    pub fn all_failed(&self) -> bool {
        self.trials_ok() == 0
    }

    pub fn summary(&self) -> MetricsSummary {
        let ok: Vec<_> = self.successes().collect();
        let eh2: Vec<_> = ok.iter().map(|(_, d)| &d.eh2).collect();
        let ekf: Vec<_> = ok.iter().map(|(_, d)| &d.ekf).collect();
        MetricsSummary {
            config_hash: self.config_hash.clone(),
            seed: self.config.seed,
            num_trials: self.trials.len(),
            trials_ok: ok.len(),
            gain_h2_norm: self.gain_h2_norm,
            eh2_yaw_wins: ok
                .iter()
                .filter(|(_, d)| d.eh2.rms[2] < d.ekf.rms[2])
                .count(),
            eh2: summarize(&eh2),
            ekf: summarize(&ekf),
            trials: ok
                .iter()
                .map(|(i, d)| TrialMetrics {
                    index: *i,
                    eh2: d.eh2.without_timing(),
                    ekf: d.ekf.without_timing(),
                })
                .collect(),
            failures: self
                .trials
                .iter()
                .filter_map(|t| {
                    t.outcome.as_ref().err().map(|e| TrialFailure {
                        index: t.index,
                        error: e.clone(),
                    })
                })
                .collect(),
        }
    }

    /// Pooled per-step timing over all successful trials, warm-up removed
    /// from each trial. Trials may have run concurrently; use
    /// [`benchmark_filters`] for the serial measurement.
    pub fn timing(&self) -> Option<TimingComparison> {
        let pool = |pick: &dyn Fn(&TrialData) -> &Vec<f64>| {
            self.successes()
                .flat_map(|(_, d)| pick(d).iter().skip(WARMUP_STEPS).copied())
                .collect::<Vec<_>>()
        };
        let eh2 = timing_stats(&pool(&|d| &d.eh2_ms), 0).ok()?;
        let ekf = timing_stats(&pool(&|d| &d.ekf_ms), 0).ok()?;
        Some(TimingComparison::new(eh2, ekf))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub timing: TimingComparison,
    pub trials_used: usize,
}

/// Serial timing comparison over at least `min_steps` post-warm-up steps of
/// each filter, cycling through the experiment's trials.
pub fn benchmark_filters(exp: &Experiment, min_steps: usize) -> Result<BenchReport> {
    let target = min_steps + WARMUP_STEPS;
    let mut eh2_ms = Vec::with_capacity(target);
    let mut ekf_ms = Vec::with_capacity(target);
    let mut trials_used = 0;
    let mut failures = 0;
    let mut index = 0;
    while eh2_ms.len() < target {
        let stream = exp.stream(index);
        index += 1;
        match run_filters(&stream.samples, &exp.setup, None) {
            Ok(run) => {
                eh2_ms.extend(run.eh2_ms);
                ekf_ms.extend(run.ekf_ms);
                trials_used += 1;
            }
            Err(_) => failures += 1,
        }
        if failures > 0 && failures >= 4 * (trials_used + 1) {
            return Err(Error::InvalidParameter(format!(
                "{failures} benchmark trials failed"
            )));
        }
    }
    Ok(BenchReport {
        timing: TimingComparison::new(
            timing_stats(&eh2_ms, WARMUP_STEPS)?,
            timing_stats(&ekf_ms, WARMUP_STEPS)?,
        ),
        trials_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short_case_ii() -> ScenarioConfig {
        ScenarioConfig {
            duration: 3.0,
            num_trials: 3,
            exclude_initial: 1.0,
            ..ScenarioConfig::case_ii()
        }
    }

    #[test]
    fn trial_streams_are_independent_and_repeatable() {
        let exp = Experiment::new(short_case_ii()).unwrap();
        assert_eq!(exp.stream(1), exp.stream(1));
        assert_ne!(
            exp.stream(0).samples[5].omega_m,
            exp.stream(1).samples[5].omega_m
        );
    }

    #[test]
    fn zero_noise_stream_is_noise_free() {
        let cfg = ScenarioConfig {
            noise: NoiseParams::zero(),
            filter_noise: Some(NoiseParams::default()),
            ..short_case_ii()
        };
        let exp = Experiment::new(cfg).unwrap();
        let a = exp.stream(0);
        let b = exp.stream(7);
        assert_eq!(a, b);
        let g = exp.config.world.g_inertial.norm();
        assert!(a.samples.iter().all(|s| (s.a_m.norm() - g).abs() < 1e-10));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let exp = Experiment::new(short_case_ii()).unwrap();
        let seq = exp.run(ExecMode::Sequential).summary();
        let par = exp.run(ExecMode::Parallel).summary();
        assert_eq!(seq, par);
        assert_eq!(seq.trials_ok, 3);
    }

    #[test]
    fn zero_trials_is_config_error() {
        let cfg = ScenarioConfig {
            num_trials: 0,
            ..short_case_ii()
        };
        assert!(matches!(run_experiment(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn noise_free_filters_need_nonzero_design_noise() {
        let cfg = ScenarioConfig {
            noise: NoiseParams::zero(),
            ..short_case_ii()
        };
        assert!(matches!(
            Experiment::new(cfg),
            Err(Error::SynthesisFailure(_))
        ));
    }

    #[test]
    fn failed_trials_are_recorded() {
        let exp = Experiment::new(short_case_ii()).unwrap();
        let mut report = exp.run(ExecMode::Sequential);
        report.trials[1].outcome = Err("boom".into());
        let s = report.summary();
        assert_eq!(s.trials_ok, 2);
        assert_eq!(
            s.failures,
            vec![TrialFailure {
                index: 1,
                error: "boom".into()
            }]
        );
        assert_eq!(s.num_trials, 3);
    }
}
