//! Batch front end: solve benchmark instances, run parameter sweeps and
//! rate studies, and verify the analytic fast paths against slow oracles.
//!
//! Exit codes: 0 success/converged, 1 usage or I/O error, 2 diverged
//! solve or failed verification.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use l1l2_core::harness::report::{rate_csv, trace_csv, trials_csv};
use l1l2_core::harness::sweep::{
    lambda_sweep, noise_eta_sweep, nonlinearity_sweep, run_sweep, step_size_sweep,
    sweep_table_csv, LAMBDA_SWEEP_VALUES, NOISE_SWEEP_ETAS, NOISE_SWEEP_ROWS,
    NONLINEARITY_SWEEP_CS, NONLINEARITY_SWEEP_DS, STEP_SWEEP_VALUES,
};
use l1l2_core::harness::{
    generate_instance, rate::rate_study, rate::RateAlphaRule, run_experiment, run_single_trial,
    AlphaRule, ExperimentSpec,
};
use l1l2_core::verify::{check_direction, check_jacobian};
use l1l2_core::SolveStatus;

mod overrides;
mod output;

use output::OutputWriter;

#[derive(Parser)]
#[command(name = "l1l2", version, about = "Sparse recovery with an l1 - l2 penalty for nonlinear measurements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment description (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory for reports.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Which report files to write.
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,
    /// Worker threads for parallel trials (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the spec's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override a spec field, e.g. --set lambda=4.5 (repeatable,
    /// dotted paths address nested values).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SweepAxis {
    Step,
    Lambda,
    Noise,
    Nonlinearity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum AlphaRuleArg {
    APriori,
    Discrepancy,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single instance (trial 0) and write report + trace.
    Solve(CommonArgs),
    /// Run all trials of the spec, or a canned parameter sweep.
    Experiment {
        #[command(flatten)]
        common: CommonArgs,
        /// Sweep one axis across its reference grid instead of running
        /// the spec as-is.
        #[arg(long, value_enum)]
        sweep: Option<SweepAxis>,
    },
    /// Reconstruction error against noise norm with a log-log slope fit.
    RateStudy {
        #[command(flatten)]
        common: CommonArgs,
        /// Noise levels in dB, comma separated.
        #[arg(long, default_value = "50,40,30,20", value_delimiter = ',')]
        noise_db: Vec<f64>,
        /// Weight rule per noise level.
        #[arg(long, value_enum, default_value_t = AlphaRuleArg::APriori)]
        alpha_rule: AlphaRuleArg,
        /// Scale of the a-priori rule alpha = scale * delta.
        #[arg(long, default_value_t = 0.2)]
        apriori_scale: f64,
    },
    /// Compare analytic Jacobian products against finite differences.
    CheckJacobian {
        #[command(flatten)]
        common: CommonArgs,
        /// Random (x, v) samples.
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Compare the closed-form direction against the grid-search oracle.
    CheckDirection {
        #[command(flatten)]
        common: CommonArgs,
        /// Random iterate samples.
        #[arg(long, default_value_t = 25)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn load_spec(common: &CommonArgs) -> Result<ExperimentSpec, String> {
    let text = std::fs::read_to_string(&common.spec)
        .map_err(|e| format!("cannot read spec {}: {e}", common.spec.display()))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format!("spec is not valid JSON: {e}"))?;
    if let Some(seed) = common.seed {
        value["seed"] = serde_json::Value::from(seed);
    }
    for entry in &common.overrides {
        overrides::apply(&mut value, entry)?;
    }
    let spec: ExperimentSpec =
        serde_json::from_value(value).map_err(|e| format!("invalid spec: {e}"))?;
    spec.validate().map_err(|e| format!("invalid spec: {e}"))?;
    Ok(spec)
}

fn configure_jobs(jobs: Option<usize>) -> Result<(), String> {
    if let Some(n) = jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| format!("cannot configure {n} worker threads: {e}"))?;
    }
    Ok(())
}

fn writer(common: &CommonArgs) -> OutputWriter {
    OutputWriter::new(
        common.out.clone(),
        matches!(common.format, Format::Json | Format::Both),
        matches!(common.format, Format::Csv | Format::Both),
    )
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Solve(common) => {
            let spec = load_spec(&common)?;
            configure_jobs(common.jobs)?;
            let (record, trace) =
                run_single_trial(&spec, 0, true).map_err(|e| e.to_string())?;
            let out = writer(&common);
            out.json("report.json", &serde_json::json!({ "spec": spec, "trial": record }))?;
            if let Some(trace) = &trace {
                out.csv("trace.csv", &trace_csv(trace))?;
            }
            match record.status {
                SolveStatus::Diverged => {
                    eprintln!("solve diverged (alpha {})", record.alpha);
                    Ok(ExitCode::from(2))
                }
                _ => {
                    println!(
                        "status {:?}, iterations {}, snr {:.4} dB, support {}",
                        record.status,
                        record.iterations,
                        record.snr_db.unwrap_or(f64::NAN),
                        record.support_size,
                    );
                    Ok(ExitCode::SUCCESS)
                }
            }
        }
        Command::Experiment { common, sweep } => {
            let spec = load_spec(&common)?;
            configure_jobs(common.jobs)?;
            let out = writer(&common);
            match sweep {
                None => {
                    let report = run_experiment(&spec).map_err(|e| e.to_string())?;
                    out.json("report.json", &report)?;
                    out.csv("trials.csv", &trials_csv(&report))?;
                    if let Some(trace) = &report.trace {
                        out.csv("trace.csv", &trace_csv(trace))?;
                    }
                    println!(
                        "{} trials, {} converged, median snr {:.4} dB",
                        report.trials.len(),
                        report.success_count,
                        report.median_snr_db.unwrap_or(f64::NAN)
                    );
                }
                Some(axis) => {
                    let sweep = match axis {
                        SweepAxis::Step => step_size_sweep(&spec, &STEP_SWEEP_VALUES),
                        SweepAxis::Lambda => lambda_sweep(&spec, &LAMBDA_SWEEP_VALUES),
                        SweepAxis::Noise => {
                            noise_eta_sweep(&spec, &NOISE_SWEEP_ROWS, &NOISE_SWEEP_ETAS)
                        }
                        SweepAxis::Nonlinearity => nonlinearity_sweep(
                            &spec,
                            &NONLINEARITY_SWEEP_CS,
                            &NONLINEARITY_SWEEP_DS,
                        ),
                    };
                    let report = run_sweep(&sweep).map_err(|e| e.to_string())?;
                    out.json(&format!("sweep_{}.json", report.name), &report)?;
                    out.csv(&format!("table_{}.csv", report.name), &sweep_table_csv(&report))?;
                    println!("sweep {} finished: {} cells", report.name, report.cells.len());
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::RateStudy {
            common,
            noise_db,
            alpha_rule,
            apriori_scale,
        } => {
            let spec = load_spec(&common)?;
            configure_jobs(common.jobs)?;
            let rule = match alpha_rule {
                AlphaRuleArg::APriori => RateAlphaRule::APriori {
                    scale: apriori_scale,
                },
                AlphaRuleArg::Discrepancy => RateAlphaRule::Discrepancy,
            };
            let study = rate_study(&spec, &noise_db, rule).map_err(|e| e.to_string())?;
            let out = writer(&common);
            out.json("rate_study.json", &study)?;
            out.csv("rate_points.csv", &rate_csv(&study))?;
            println!(
                "slope {:.4} (95% CI {:.4}..{:.4}) over {} noise levels",
                study.fit.slope,
                study.fit.slope_ci.0,
                study.fit.slope_ci.1,
                study.points.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckJacobian { common, samples } => {
            let spec = load_spec(&common)?;
            let (model, _, _) = generate_instance(&spec, 0).map_err(|e| e.to_string())?;
            let report =
                check_jacobian(&model, samples, 1e-5, spec.seed).map_err(|e| e.to_string())?;
            println!(
                "max relative error {:.3e} over {} samples",
                report.max_error, report.samples
            );
            if report.max_error <= 1e-4 {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "jacobian check failed at sample {} (error {:.3e} > 1e-4)",
                    report.worst_sample, report.max_error
                );
                Ok(ExitCode::from(2))
            }
        }
        Command::CheckDirection { common, samples } => {
            let spec = load_spec(&common)?;
            let (model, _, y_clean) = generate_instance(&spec, 0).map_err(|e| e.to_string())?;
            let alpha = match spec.alpha {
                AlphaRule::Fixed(a) => a,
                AlphaRule::Discrepancy => 0.125,
            };
            let cfg = spec.solver_config(alpha);
            let report = check_direction(&model, &y_clean, &cfg, samples, spec.seed)
                .map_err(|e| e.to_string())?;
            println!(
                "max component error {:.3e} over {} samples",
                report.max_error, report.samples
            );
            if report.max_error <= 1e-6 {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "direction check failed at sample {} (error {:.3e} > 1e-6)",
                    report.worst_sample, report.max_error
                );
                Ok(ExitCode::from(2))
            }
        }
    }
}
