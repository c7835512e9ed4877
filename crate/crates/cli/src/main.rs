use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eh2_core::harness::{
    benchmark_filters, write_outputs, CaseId, ExecMode, Experiment, MetricsSummary, ScenarioConfig,
    TimingComparison,
};
use eh2_core::synthesis::gain_file::format_matrix;
use eh2_core::Error;

#[derive(Parser)]
#[command(
    name = "eh2",
    version,
    about = "Extended H2 attitude estimation: gain synthesis, simulation and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the estimator gain and write it as a plain-text matrix
    Synthesize {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Directory for gain.txt; printed to stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte-Carlo scenario and write per-trial CSV plus metrics
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Serial per-step timing comparison of the two filters
    Bench {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Minimum number of timed steps per filter after warm-up
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        /// Directory for bench.json
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the metrics of a previous run as a table
    Report {
        /// Output directory of a previous `run`
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// JSON scenario file; takes precedence over --case
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario: I (slow, small angles) or II (fast, large angles)
    #[arg(long, default_value = "I")]
    case: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Seconds dropped from the start of each trial before computing errors
    #[arg(long)]
    exclude_initial: Option<f64>,
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<ScenarioConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::for_case(self.case.parse::<CaseId>()?),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(trials) = self.trials {
            cfg.num_trials = trials;
        }
        if let Some(s) = self.exclude_initial {
            cfg.exclude_initial = s;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

enum Failure {
    Config(String),
    Synthesis(String),
    AllTrialsFailed(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Synthesis(_) => 2,
            Failure::AllTrialsFailed(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Synthesis(m) | Failure::AllTrialsFailed(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SynthesisFailure(_) => Failure::Synthesis(e.to_string()),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn synthesize(scenario: &ScenarioArgs, out: Option<&Path>) -> Result<(), Failure> {
    let exp = Experiment::new(scenario.resolve()?)?;
    let cert = &exp.certificate;
    let text = format_matrix(&cert.l);
    eprintln!(
        "h2 norm {:.6e}, gamma {:.6e}, max closed-loop Re(eig) {:.4}, LMI feasible {}",
        cert.h2_norm, cert.gamma, cert.max_closedloop_real_eig, cert.lmi_feasible
    );
    match out {
        Some(dir) => write_file(&dir.join("gain.txt"), &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(scenario: &ScenarioArgs, out: &Path) -> Result<(), Failure> {
    let exp = Experiment::new(scenario.resolve()?)?;
    let report = exp.run(ExecMode::default());
    write_outputs(&report, &exp.certificate.l, out).map_err(|e| Failure::Config(e.to_string()))?;
    let summary = report.summary();
    print_summary(&summary, report.timing().as_ref());
    if report.all_failed() {
        let first = summary
            .failures
            .first()
            .map(|f| f.error.as_str())
            .unwrap_or("unknown");
        return Err(Failure::AllTrialsFailed(format!(
            "all {} trials failed; first error: {first}",
            summary.num_trials
        )));
    }
    Ok(())
}

fn bench(scenario: &ScenarioArgs, steps: usize, out: Option<&Path>) -> Result<(), Failure> {
    let exp = Experiment::new(scenario.resolve()?)?;
    let report =
        benchmark_filters(&exp, steps).map_err(|e| Failure::AllTrialsFailed(e.to_string()))?;
    let t = &report.timing;
    println!("filter  mean_ms      std_ms       steps");
    println!(
        "eH2     {:<12.6} {:<12.6} {}",
        t.eh2.mean_ms, t.eh2.std_ms, t.eh2.steps
    );
    println!(
        "EKF     {:<12.6} {:<12.6} {}",
        t.ekf.mean_ms, t.ekf.std_ms, t.ekf.steps
    );
    println!(
        "ratio eH2/EKF {:.3} over {} trials",
        t.ratio, report.trials_used
    );
    if let Some(dir) = out {
        let json = serde_json::to_string_pretty(&report).expect("bench report serializes");
        write_file(&dir.join("bench.json"), &(json + "\n"))?;
    }
    Ok(())
}

fn report(out: &Path) -> Result<(), Failure> {
    let read = |name: &str| fs::read_to_string(out.join(name));
    let text = read("metrics.json")
        .map_err(|e| Failure::Config(format!("{}: {e}", out.join("metrics.json").display())))?;
    let summary: MetricsSummary =
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("metrics.json: {e}")))?;
    let timing = read("timing.json")
        .ok()
        .and_then(|t| serde_json::from_str::<TimingComparison>(&t).ok());
    print_summary(&summary, timing.as_ref());
    Ok(())
}

fn print_summary(s: &MetricsSummary, timing: Option<&TimingComparison>) {
    println!(
        "config {} seed {}: {}/{} trials ok",
        s.config_hash, s.seed, s.trials_ok, s.num_trials
    );
    println!("filter  rms_roll   rms_pitch  rms_yaw    (deg, mean over trials)");
    for (name, f) in [("eH2", &s.eh2), ("EKF", &s.ekf)] {
        if let Some(f) = f {
            println!(
                "{name:<7} {:<10.4} {:<10.4} {:<10.4}",
                f.mean_rms[0], f.mean_rms[1], f.mean_rms[2]
            );
        }
    }
    println!("filter  min..max roll        min..max pitch       min..max yaw (deg)");
    for (name, f) in [("eH2", &s.eh2), ("EKF", &s.ekf)] {
        if let Some(f) = f {
            let span = |i: usize| format!("{:.4}..{:.4}", f.err_min[i], f.err_max[i]);
            println!("{name:<7} {:<20} {:<20} {}", span(0), span(1), span(2));
        }
    }
    println!(
        "eH2 yaw RMS below EKF in {}/{} trials",
        s.eh2_yaw_wins, s.trials_ok
    );
    if let Some(t) = timing {
        println!(
            "step time eH2 {:.6} ms, EKF {:.6} ms, ratio {:.3}",
            t.eh2.mean_ms, t.ekf.mean_ms, t.ratio
        );
    }
    for f in &s.failures {
        println!("trial {} failed: {}", f.index, f.error);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synthesize { scenario, out } => synthesize(scenario, out.as_deref()),
        Command::Run { scenario, out } => run(scenario, out),
        Command::Bench {
            scenario,
            steps,
            out,
        } => bench(scenario, *steps, out.as_deref()),
        Command::Report { out } => report(out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
