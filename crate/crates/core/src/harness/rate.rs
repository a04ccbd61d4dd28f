//! Empirical convergence-rate study: reconstruction error against noise
//! norm over a set of noise levels, summarized by a log-log slope fit.
//! The fit is descriptive only; no pass/fail threshold is attached to the
//! slope on real benchmark runs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::SolveStatus;

use super::metrics::median;
use super::{run_trial, ExperimentSpec, NoiseLevel, TrialAlpha};

/// How alpha is chosen at each noise level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateAlphaRule {
    /// alpha = scale * delta, the a-priori rule for the quadratic misfit.
    APriori { scale: f64 },
    /// Discrepancy-principle search per trial.
    Discrepancy,
}

/// Aggregates of one noise level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatePoint {
    pub noise_db: f64,
    pub median_delta: f64,
    pub median_error: f64,
    /// Trials that did not diverge (diverged ones are excluded from the fit).
    pub trials_ok: usize,
    pub trials_total: usize,
}

/// Least-squares fit of log(error) against log(delta).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    /// 95% normal-approximation interval around the slope.
    pub slope_ci: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateStudy {
    pub rule: RateAlphaRule,
    pub points: Vec<RatePoint>,
    pub fit: SlopeFit,
}

/// Fit log(e) = slope * log(d) + intercept by least squares.
pub fn fit_log_log(deltas: &[f64], errors: &[f64]) -> Result<SlopeFit> {
    if deltas.len() != errors.len() {
        return Err(Error::DimensionMismatch {
            what: "rate fit inputs",
            expected: deltas.len(),
            got: errors.len(),
        });
    }
    if deltas.len() < 2 {
        return Err(Error::InvalidParam(
            "rate fit needs at least two points".into(),
        ));
    }
    if deltas.iter().chain(errors).any(|&v| !v.is_finite() || v <= 0.0) {
        return Err(Error::InvalidParam(
            "rate fit needs positive finite deltas and errors".into(),
        ));
    }
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParam(
            "rate fit needs at least two distinct noise levels".into(),
        ));
    }
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (slope * x + intercept);
            r * r
        })
        .sum();
    let dof = (xs.len() as f64 - 2.0).max(1.0);
    let stderr = (sse / dof / sxx).sqrt();
    Ok(SlopeFit {
        slope,
        intercept,
        slope_stderr: stderr,
        slope_ci: (slope - 1.96 * stderr, slope + 1.96 * stderr),
    })
}

/// Run the spec at each noise level, collect median (delta, error) pairs
/// and fit the log-log slope. Needs at least three levels.
pub fn rate_study(
    base: &ExperimentSpec,
    noise_dbs: &[f64],
    rule: RateAlphaRule,
) -> Result<RateStudy> {
    if noise_dbs.len() < 3 {
        return Err(Error::InvalidParam(
            "rate study needs at least three noise levels".into(),
        ));
    }
    let points: Vec<Result<RatePoint>> = noise_dbs
        .par_iter()
        .map(|&db| {
            let spec = ExperimentSpec {
                noise_db: NoiseLevel::Db(db),
                ..base.clone()
            };
            spec.validate()?;
            let trial_rule = match rule {
                RateAlphaRule::APriori { scale } => TrialAlpha::APriori { scale },
                RateAlphaRule::Discrepancy => TrialAlpha::Discrepancy,
            };
            let mut deltas = Vec::new();
            let mut errors = Vec::new();
            let mut ok = 0usize;
            for t in 0..spec.trials {
                let (record, _) = run_trial(&spec, t, &trial_rule, false)?;
                if record.status != SolveStatus::Diverged {
                    ok += 1;
                    if let Some(e) = record.relative_error {
                        // the fit uses absolute error ||x*-xt||, consistent
                        // with delta being an absolute noise norm
                        let xt_norm = crate::signal::Signal::from_vec(record.x_true.clone())
                            .norm_l2();
                        deltas.push(record.delta);
                        errors.push(e * xt_norm);
                    }
                }
            }
            Ok(RatePoint {
                noise_db: db,
                median_delta: median(&deltas).unwrap_or(f64::NAN),
                median_error: median(&errors).unwrap_or(f64::NAN),
                trials_ok: ok,
                trials_total: spec.trials,
            })
        })
        .collect();
    let points = points.into_iter().collect::<Result<Vec<_>>>()?;

    let usable: Vec<&RatePoint> = points
        .iter()
        .filter(|p| p.trials_ok > 0 && p.median_delta > 0.0 && p.median_error > 0.0)
        .collect();
    let deltas: Vec<f64> = usable.iter().map(|p| p.median_delta).collect();
    let errors: Vec<f64> = usable.iter().map(|p| p.median_error).collect();
    let fit = fit_log_log(&deltas, &errors)?;
    Ok(RateStudy { rule, points, fit })
}
