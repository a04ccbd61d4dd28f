//! Synthetic sparse-recovery experiments: instance generation, noise,
//! metrics, parameter sweeps, a convergence-rate study and serializable
//! reports.
//!
//! The benchmark family measures an s-sparse signal through
//! y = a(A b(x)) with a Gaussian matrix A rescaled to unit-order spectral
//! norm. Everything is deterministic given the spec: randomness comes from
//! per-(seed, trial, purpose) streams, so trials are order-independent and
//! reports are bit-reproducible.

pub mod metrics;
pub mod rate;
pub mod report;
pub mod rng;
pub mod sweep;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{rescale_matrix, DenseMatrix, ForwardModel, NonlinearCsModel, OperatorForm};
use crate::penalty::RegularizationParams;
use crate::signal::Signal;
use crate::solver::{solve, IterationRecord, SolveStatus, SolverConfig, StepRule};
use crate::tuning::{select_alpha, AlphaTrial, DiscrepancyConfig, SelectionFlag};

use metrics::{mean, median, relative_error, signed_support_recall, snr_db};
use rng::{stream, StreamPurpose};

/// Default rescale factor for the Gaussian measurement matrix. Calibrated
/// so that, with unit spikes, the benchmark family sits where the unit-step
/// iteration descends monotonically (local curvature just below lambda = 4)
/// while the good recovery basin still reaches the mid-30s dB.
pub const DEFAULT_MATRIX_RESCALE: f64 = 0.035;

pub const DEFAULT_X0_VALUE: f64 = 1e-6;

/// Amplitude law for the nonzero entries of the true signal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpikeModel {
    /// Unit-magnitude spikes with random signs.
    UnitSigns,
    /// Standard normal amplitudes.
    StandardNormal,
}

/// Noise level in dB relative to signal power, or noise-free.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseLevel {
    Db(f64),
    None,
}

impl Serialize for NoiseLevel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            NoiseLevel::Db(v) => v.serialize(s),
            NoiseLevel::None => "none".serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for NoiseLevel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(NoiseLevel::Db(v)),
            Raw::Str(s) if s == "none" => Ok(NoiseLevel::None),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "noise_db must be a number or \"none\", got \"{s}\""
            ))),
        }
    }
}

/// Penalty-weight rule: a fixed value or the discrepancy-principle search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlphaRule {
    Fixed(f64),
    Discrepancy,
}

impl Serialize for AlphaRule {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AlphaRule::Fixed(v) => v.serialize(s),
            AlphaRule::Discrepancy => "discrepancy".serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for AlphaRule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(AlphaRule::Fixed(v)),
            Raw::Str(s) if s == "discrepancy" => Ok(AlphaRule::Discrepancy),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "alpha must be a number or \"discrepancy\", got \"{s}\""
            ))),
        }
    }
}

fn default_x0_value() -> f64 {
    DEFAULT_X0_VALUE
}

fn default_matrix_rescale() -> f64 {
    DEFAULT_MATRIX_RESCALE
}

fn default_spikes() -> SpikeModel {
    SpikeModel::UnitSigns
}

fn default_max_iters() -> usize {
    crate::solver::DEFAULT_MAX_ITERS
}

fn default_tau() -> f64 {
    crate::tuning::DEFAULT_TAU
}

fn default_alpha0() -> f64 {
    crate::tuning::DEFAULT_ALPHA0
}

fn default_max_halvings() -> usize {
    crate::tuning::DEFAULT_MAX_HALVINGS
}

/// Complete description of one experiment cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Signal dimension.
    pub n: usize,
    /// Measurement count as a fraction of n; m = round(m_ratio * n).
    pub m_ratio: f64,
    /// Spike count as a fraction of m; s = round(sparsity_ratio * m).
    pub sparsity_ratio: f64,
    pub c: u32,
    pub d: u32,
    pub form: OperatorForm,
    pub noise_db: NoiseLevel,
    pub eta: f64,
    pub lambda: f64,
    pub step: StepRule,
    pub alpha: AlphaRule,
    pub seed: u64,
    pub trials: usize,
    /// Initial iterate value (every entry); nonzero so the gradient branch
    /// starts immediately.
    #[serde(default = "default_x0_value")]
    pub x0_value: f64,
    /// Rescale factor applied to the raw Gaussian matrix.
    #[serde(default = "default_matrix_rescale")]
    pub matrix_rescale: f64,
    /// Amplitude law for the true signal's spikes.
    #[serde(default = "default_spikes")]
    pub spikes: SpikeModel,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Absolute stationarity-gap tolerance; `None` = automatic.
    #[serde(default)]
    pub grad_tol: Option<f64>,
    /// Discrepancy band factor (only used with alpha = "discrepancy").
    #[serde(default = "default_tau")]
    pub tau: f64,
    #[serde(default = "default_alpha0")]
    pub alpha0: f64,
    #[serde(default = "default_max_halvings")]
    pub max_halvings: usize,
}

impl ExperimentSpec {
    /// The n = 200, m = 80, s = 16 nonlinear benchmark with c = 2, d = 3,
    /// 30 dB noise, eta = 1, lambda = 4, unit step and the
    /// discrepancy-principle weight search.
    pub fn benchmark() -> Self {
        ExperimentSpec {
            n: 200,
            m_ratio: 0.4,
            sparsity_ratio: 0.2,
            c: 2,
            d: 3,
            form: OperatorForm::Additive,
            noise_db: NoiseLevel::Db(30.0),
            eta: 1.0,
            lambda: 4.0,
            step: StepRule::Fixed(1.0),
            alpha: AlphaRule::Discrepancy,
            seed: 42,
            trials: 10,
            x0_value: DEFAULT_X0_VALUE,
            matrix_rescale: DEFAULT_MATRIX_RESCALE,
            spikes: SpikeModel::UnitSigns,
            max_iters: crate::solver::DEFAULT_MAX_ITERS,
            grad_tol: None,
            tau: crate::tuning::DEFAULT_TAU,
            alpha0: crate::tuning::DEFAULT_ALPHA0,
            max_halvings: crate::tuning::DEFAULT_MAX_HALVINGS,
        }
    }

    pub fn m(&self) -> usize {
        (self.m_ratio * self.n as f64).round() as usize
    }

    pub fn sparsity(&self) -> usize {
        (self.sparsity_ratio * self.m() as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParam("n must be >= 1".into()));
        }
        if !(self.m_ratio > 0.0 && self.m_ratio <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "m_ratio must lie in (0, 1], got {}",
                self.m_ratio
            )));
        }
        if !(self.sparsity_ratio > 0.0 && self.sparsity_ratio <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "sparsity_ratio must lie in (0, 1], got {}",
                self.sparsity_ratio
            )));
        }
        if self.m() < 1 || self.sparsity() < 1 {
            return Err(Error::InvalidParam(
                "m and sparsity must round to at least 1".into(),
            ));
        }
        if self.c < 1 || self.d < 1 {
            return Err(Error::InvalidParam("c and d must be >= 1".into()));
        }
        if let NoiseLevel::Db(db) = self.noise_db {
            if !db.is_finite() {
                return Err(Error::InvalidParam("noise_db must be finite".into()));
            }
        }
        if let AlphaRule::Fixed(a) = self.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "fixed alpha must be positive, got {a}"
                )));
            }
        }
        if self.trials == 0 {
            return Err(Error::InvalidParam("trials must be >= 1".into()));
        }
        if !self.x0_value.is_finite() {
            return Err(Error::InvalidParam("x0_value must be finite".into()));
        }
        if !(self.matrix_rescale > 0.0 && self.matrix_rescale.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "matrix_rescale must be positive, got {}",
                self.matrix_rescale
            )));
        }
        // delegate the solver-side checks
        self.solver_config(1.0).validate()
    }

    /// Solver configuration for this spec at a concrete alpha.
    pub fn solver_config(&self, alpha: f64) -> SolverConfig {
        SolverConfig {
            reg: RegularizationParams {
                alpha,
                eta: self.eta,
                q: 2.0,
            },
            lambda: self.lambda,
            step_rule: self.step,
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            divergence_guard: crate::solver::DEFAULT_DIVERGENCE_GUARD,
        }
    }

    pub fn discrepancy_config(&self, delta: f64) -> DiscrepancyConfig {
        DiscrepancyConfig {
            alpha0: self.alpha0,
            tau: self.tau,
            delta,
            max_halvings: self.max_halvings,
        }
    }

    pub fn initial_iterate(&self) -> Signal {
        Signal::constant(self.n, self.x0_value)
    }
}

/// Draw the measurement model, true sparse signal and clean data for one
/// trial. Deterministic in (spec.seed, trial_index).
pub fn generate_instance(
    spec: &ExperimentSpec,
    trial_index: usize,
) -> Result<(NonlinearCsModel, Signal, Signal)> {
    spec.validate()?;
    let n = spec.n;
    let m = spec.m();
    let s = spec.sparsity();

    let mut mat_rng = stream(spec.seed, trial_index as u64, StreamPurpose::Matrix);
    let gaussian = DenseMatrix::from_fn(m, n, |_, _| mat_rng.sample(StandardNormal));
    let matrix = rescale_matrix(&gaussian, spec.matrix_rescale)?;
    let model = NonlinearCsModel::new(matrix, spec.c, spec.d, spec.form)?;

    let mut sig_rng = stream(spec.seed, trial_index as u64, StreamPurpose::Signal);
    // s distinct spike positions via partial Fisher-Yates
    let mut positions: Vec<usize> = (0..n).collect();
    for i in 0..s {
        let j = sig_rng.gen_range(i..n);
        positions.swap(i, j);
    }
    let mut x_true = Signal::zeros(n);
    for &p in &positions[..s] {
        let v: f64 = sig_rng.sample(StandardNormal);
        x_true[p] = match spec.spikes {
            SpikeModel::UnitSigns => v.signum(),
            SpikeModel::StandardNormal => v,
        };
    }

    let y_clean = model.apply(&x_true)?;
    Ok((model, x_true, y_clean))
}

/// Add white Gaussian noise scaled so that
/// 10*log10(||y||^2 / ||e||^2) equals `noise_db` exactly.
/// Returns the noisy data and the noise norm delta.
pub fn add_noise_db(
    y_clean: &Signal,
    noise_db: NoiseLevel,
    rng: &mut ChaCha8Rng,
) -> Result<(Signal, f64)> {
    match noise_db {
        NoiseLevel::None => Ok((y_clean.clone(), 0.0)),
        NoiseLevel::Db(db) => {
            if !db.is_finite() {
                return Err(Error::InvalidParam("noise_db must be finite".into()));
            }
            let y_norm = y_clean.norm_l2();
            if y_norm == 0.0 {
                return Err(Error::InvalidParam(
                    "cannot set a dB noise level on zero data".into(),
                ));
            }
            let raw = Signal::from_vec(
                (0..y_clean.dim())
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect(),
            );
            let raw_norm = raw.norm_l2();
            if raw_norm == 0.0 {
                return Err(Error::NonFinite("noise draw"));
            }
            let noise = raw.scaled(y_norm * 10f64.powf(-db / 20.0) / raw_norm);
            let delta = noise.norm_l2();
            Ok((y_clean.add(&noise), delta))
        }
    }
}

/// Per-trial outcome. The recovered and true signals are stored so every
/// metric can be recomputed from the report alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    /// Master seed echoed for traceability.
    pub seed: u64,
    /// Penalty weight used (selected weight under the discrepancy rule).
    pub alpha: f64,
    pub status: SolveStatus,
    pub iterations: usize,
    pub delta: f64,
    pub residual_norm: f64,
    pub support_size: usize,
    /// Recovery metrics; absent when the solve diverged.
    pub snr_db: Option<f64>,
    pub relative_error: Option<f64>,
    pub positive_recall: Option<f64>,
    pub negative_recall: Option<f64>,
    /// Discrepancy-search outcome, when that rule was active.
    pub selection_flag: Option<SelectionFlag>,
    /// Per-weight log of the discrepancy search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_trials: Option<Vec<AlphaTrial>>,
    pub x_star: Vec<f64>,
    pub x_true: Vec<f64>,
}

/// Aggregated outcome of all trials of one spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub trials: Vec<TrialRecord>,
    /// Aggregates over non-diverged trials.
    pub median_snr_db: Option<f64>,
    pub mean_snr_db: Option<f64>,
    pub success_count: usize,
    /// Iteration trace of trial 0, for plotting.
    pub trace: Option<Vec<IterationRecord>>,
}

// How the trial resolves its penalty weight.
pub(crate) enum TrialAlpha {
    Fixed(f64),
    Discrepancy,
    /// alpha = scale * delta (a-priori rule for the quadratic misfit).
    APriori { scale: f64 },
}

impl TrialAlpha {
    fn from_rule(rule: AlphaRule) -> Self {
        match rule {
            AlphaRule::Fixed(a) => TrialAlpha::Fixed(a),
            AlphaRule::Discrepancy => TrialAlpha::Discrepancy,
        }
    }
}

// Treat solver-side blowups as a diverged trial, propagate caller bugs.
fn divergence_to_record(e: &Error) -> bool {
    matches!(
        e,
        Error::DivergedEvaluation(_) | Error::NonFinite(_) | Error::AllTrialsDiverged
    )
}

pub(crate) fn run_trial(
    spec: &ExperimentSpec,
    trial_index: usize,
    alpha_rule: &TrialAlpha,
    want_trace: bool,
) -> Result<(TrialRecord, Option<Vec<IterationRecord>>)> {
    let (model, x_true, y_clean) = generate_instance(spec, trial_index)?;
    let mut noise_rng = stream(spec.seed, trial_index as u64, StreamPurpose::Noise);
    let (y_obs, delta) = add_noise_db(&y_clean, spec.noise_db, &mut noise_rng)?;
    let x0 = spec.initial_iterate();

    let diverged_record = |alpha: f64, flag: Option<SelectionFlag>| TrialRecord {
        trial: trial_index,
        seed: spec.seed,
        alpha,
        status: SolveStatus::Diverged,
        iterations: 0,
        delta,
        residual_norm: f64::NAN,
        support_size: 0,
        snr_db: None,
        relative_error: None,
        positive_recall: None,
        negative_recall: None,
        selection_flag: flag,
        alpha_trials: None,
        x_star: Vec::new(),
        x_true: x_true.as_slice().to_vec(),
    };

    let fixed_alpha = match alpha_rule {
        TrialAlpha::Fixed(a) => Some(*a),
        TrialAlpha::APriori { scale } => Some(scale * delta),
        TrialAlpha::Discrepancy => None,
    };
    let (alpha, solution, status, iterations, residual_norm, flag, log, trace) = match fixed_alpha
    {
        Some(alpha) => {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "trial alpha must be positive, got {alpha}"
                )));
            }
            let cfg = spec.solver_config(alpha);
            let trace = solve(&model, &y_obs, &x0, &cfg)?;
            (
                alpha,
                trace.final_iterate.clone(),
                trace.status,
                trace.iterations(),
                trace.final_residual_norm(),
                None,
                None,
                want_trace.then(|| trace.records.clone()),
            )
        }
        None => {
            let cfg = spec.solver_config(spec.alpha0);
            let disc = spec.discrepancy_config(delta);
            match select_alpha(&model, &y_obs, &x0, &cfg, &disc) {
                Ok(sel) => {
                    let iterations =
                        sel.trials.iter().map(|t| t.iterations).sum::<usize>();
                    let status = sel
                        .trials
                        .iter()
                        .rev()
                        .find(|t| t.alpha == sel.alpha)
                        .map_or(SolveStatus::Converged, |t| t.status);
                    // re-solve cold at the accepted weight when a trace is
                    // wanted; the search itself warm-starts
                    let trace = if want_trace {
                        let cfg = spec.solver_config(sel.alpha);
                        Some(solve(&model, &y_obs, &x0, &cfg)?.records)
                    } else {
                        None
                    };
                    (
                        sel.alpha,
                        sel.solution,
                        status,
                        iterations,
                        sel.residual_norm,
                        Some(sel.flag),
                        Some(sel.trials),
                        trace,
                    )
                }
                Err(e) if divergence_to_record(&e) => {
                    return Ok((diverged_record(spec.alpha0, None), None));
                }
                Err(e) => return Err(e),
            }
        }
    };

    if status == SolveStatus::Diverged {
        let mut rec = diverged_record(alpha, flag);
        rec.iterations = iterations;
        rec.alpha_trials = log;
        rec.x_star = solution.as_slice().to_vec();
        rec.support_size = solution.support_size();
        return Ok((rec, trace));
    }

    let (positive_recall, negative_recall) = signed_support_recall(&solution, &x_true);
    let record = TrialRecord {
        trial: trial_index,
        seed: spec.seed,
        alpha,
        status,
        iterations,
        delta,
        residual_norm,
        support_size: solution.support_size(),
        snr_db: Some(snr_db(&solution, &x_true)?),
        relative_error: Some(relative_error(&solution, &x_true)?),
        positive_recall,
        negative_recall,
        selection_flag: flag,
        alpha_trials: log,
        x_star: solution.as_slice().to_vec(),
        x_true: x_true.as_slice().to_vec(),
    };
    Ok((record, trace))
}

/// Run one trial of the spec, optionally capturing its iteration trace.
pub fn run_single_trial(
    spec: &ExperimentSpec,
    trial_index: usize,
    want_trace: bool,
) -> Result<(TrialRecord, Option<Vec<IterationRecord>>)> {
    spec.validate()?;
    run_trial(spec, trial_index, &TrialAlpha::from_rule(spec.alpha), want_trace)
}

/// Run every trial of the spec (in parallel) and aggregate.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    let rule = TrialAlpha::from_rule(spec.alpha);
    let results: Vec<Result<(TrialRecord, Option<Vec<IterationRecord>>)>> = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, t, &rule, t == 0))
        .collect();

    let mut trials = Vec::with_capacity(spec.trials);
    let mut trace = None;
    for r in results {
        let (record, t) = r?;
        if record.trial == 0 {
            trace = t;
        }
        trials.push(record);
    }

    let snrs: Vec<f64> = trials.iter().filter_map(|t| t.snr_db).collect();
    let success_count = trials
        .iter()
        .filter(|t| t.status != SolveStatus::Diverged)
        .count();
    Ok(ExperimentReport {
        spec: spec.clone(),
        median_snr_db: median(&snrs),
        mean_snr_db: mean(&snrs),
        success_count,
        trials,
        trace,
    })
}
