//! Scenario generation, seeded Monte-Carlo runs, metrics and timing.

pub mod config;
pub mod experiment;
pub mod metrics;
pub mod output;
pub mod timing;
pub mod trajectory;

pub use config::{CaseId, Profile, ScenarioConfig};
pub use experiment::{
    benchmark_filters, run_experiment, run_filters, simulate_stream, trial_rng, BenchReport,
    ExecMode, Experiment, ExperimentReport, FilterRun, FilterSetup, MetricsSummary, SensorStream,
    TimingComparison, TrialRecord,
};
pub use metrics::{compute_metrics, RunMetrics};
pub use output::{trial_csv, write_outputs, CSV_HEADER};
pub use timing::{timing_stats, TimingStats, WARMUP_STEPS};
pub use trajectory::{generate_trajectory, Trajectory};
