//! CSV renderings of reports. Floats use Rust's shortest round-trip
//! formatting; missing values print as NaN.

use crate::solver::IterationRecord;

use super::rate::RateStudy;
use super::{ExperimentReport, TrialRecord};

fn opt(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v}"),
        None => "NaN".into(),
    }
}

/// Iteration trace with columns k, objective, residual, gap, support, step.
pub fn trace_csv(records: &[IterationRecord]) -> String {
    let mut out = String::from("k,objective,residual,gap,support,step\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.k, r.objective, r.residual_norm, r.gap, r.support, r.step
        ));
    }
    out
}

fn trial_row(t: &TrialRecord) -> String {
    format!(
        "{},{},{},{:?},{},{},{},{},{},{},{},{}\n",
        t.trial,
        t.seed,
        t.alpha,
        t.status,
        t.iterations,
        t.delta,
        t.residual_norm,
        t.support_size,
        opt(t.snr_db),
        opt(t.relative_error),
        opt(t.positive_recall),
        opt(t.negative_recall),
    )
}

/// One row per trial.
pub fn trials_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(
        "trial,seed,alpha,status,iterations,delta,residual_norm,support_size,\
         snr_db,relative_error,positive_recall,negative_recall\n",
    );
    for t in &report.trials {
        out.push_str(&trial_row(t));
    }
    out
}

/// One row per noise level of a rate study.
pub fn rate_csv(study: &RateStudy) -> String {
    let mut out = String::from("noise_db,median_delta,median_error,trials_ok,trials_total\n");
    for p in &study.points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            p.noise_db, p.median_delta, p.median_error, p.trials_ok, p.trials_total
        ));
    }
    out
}
