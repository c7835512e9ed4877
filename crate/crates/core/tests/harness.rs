use eh2_core::harness::{
    output::trial_file_name, trial_csv, write_outputs, ExecMode, Experiment, MetricsSummary,
    ScenarioConfig, TimingComparison, CSV_HEADER,
};
use eh2_core::Error;
use proptest::prelude::*;

fn short(cfg: ScenarioConfig, trials: usize) -> ScenarioConfig {
    ScenarioConfig {
        num_trials: trials,
        ..cfg
    }
}

#[test]
fn csv_layout() {
    let exp = Experiment::new(short(ScenarioConfig::case_ii(), 1)).unwrap();
    let report = exp.run(ExecMode::Sequential);
    let (_, data) = report.successes().next().unwrap();
    let text = trial_csv(&data.series);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), exp.config.num_samples());
    for (k, row) in rows.iter().enumerate().step_by(97) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 10);
        for f in &fields {
            let mantissa = f.trim_start_matches('-').split('e').next().unwrap();
            assert_eq!(mantissa.replace('.', "").len(), 17, "{f}");
        }
        let t: f64 = fields[0].parse().unwrap();
        assert_eq!(t, data.series.times[k]);
        let psi: f64 = fields[3].parse().unwrap();
        assert_eq!(psi, data.series.truth[k].psi);
    }
}

#[test]
fn output_directory_contents() {
    let dir = tempfile::tempdir().unwrap();
    let exp = Experiment::new(short(ScenarioConfig::case_ii(), 2)).unwrap();
    let report = exp.run(ExecMode::default());
    write_outputs(&report, &exp.certificate.l, dir.path()).unwrap();
    for name in [trial_file_name(0), trial_file_name(1)] {
        assert!(dir.path().join(name).exists());
    }
    let metrics: MetricsSummary =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("metrics.json")).unwrap())
            .unwrap();
    assert_eq!(metrics, report.summary());
    assert!(metrics.trials.iter().all(|t| t.eh2.timing.is_none()));
    let timing: TimingComparison =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("timing.json")).unwrap())
            .unwrap();
    assert!(timing.ratio > 0.0);
    let gain = eh2_core::synthesis::read_matrix(std::io::BufReader::new(
        std::fs::File::open(dir.path().join("gain.txt")).unwrap(),
    ))
    .unwrap();
    assert_eq!(gain, exp.certificate.l);
    let cfg = ScenarioConfig::load(&dir.path().join("config.json")).unwrap();
    assert_eq!(cfg, exp.config);
}

#[test]
fn config_file_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    let mut value: serde_json::Value =
        serde_json::from_str(&ScenarioConfig::case_i().to_json()).unwrap();
    value["noise"]["n_x"] = serde_json::json!(0.1);
    std::fs::write(&path, value.to_string()).unwrap();
    assert!(matches!(ScenarioConfig::load(&path), Err(Error::Config(_))));
}

#[test]
fn case_i_yaw_ordering_holds_for_default_noise() {
    let summary = Experiment::new(ScenarioConfig::case_i())
        .unwrap()
        .run(ExecMode::default())
        .summary();
    assert_eq!(summary.trials_ok, 10);
    assert!(summary.eh2_yaw_wins >= 8, "{}", summary.eh2_yaw_wins);
}

fn shuffled_summary_matches(order: Vec<usize>) -> bool {
    use std::sync::OnceLock;
    static REPORT: OnceLock<eh2_core::harness::ExperimentReport> = OnceLock::new();
    let report = REPORT.get_or_init(|| {
        Experiment::new(short(ScenarioConfig::case_ii(), 6))
            .unwrap()
            .run(ExecMode::default())
    });
    let mut permuted = report.clone();
    permuted.trials = order.iter().map(|&i| report.trials[i].clone()).collect();
    let (a, b) = (report.summary(), permuted.summary());
    a.eh2 == b.eh2 && a.ekf == b.ekf && a.eh2_yaw_wins == b.eh2_yaw_wins
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn aggregation_ignores_trial_order(order in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()) {
        prop_assert!(shuffled_summary_matches(order));
    }
}
