//! Iterative soft-thresholding solver for the objective
//! (1/2)*||F(x) - y||^2 + alpha*||x||_1 - beta*||x||_2.
//!
//! The objective is split as G + Phi with a surrogate weight lambda:
//! G(x) = (1/2)*||F(x) - y||^2 - (lambda/2)*||x||^2 - beta*||x||_2 and
//! Phi(x) = (lambda/2)*||x||^2 + alpha*||x||_1. Each iteration minimizes
//! the partial linearization <G'(x), z> + Phi(z), which has the closed-form
//! soft-threshold solution, then moves along the segment toward it. G is not
//! differentiable at the origin, so an exactly-zero iterate takes one plain
//! l1 thresholding step instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::ForwardModel;
use crate::penalty::{regularizer, soft_threshold_vector, RegularizationParams};
use crate::signal::Signal;

/// Step-size selection for the segment x + s*(z - x), s in [0, 1].
///
/// Serializes untagged: a bare number is a fixed step, a map with
/// `grid_points` selects the grid search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepRule {
    /// Constant step. Values above 1 are accepted so that divergent
    /// configurations can be reproduced rather than rejected.
    Fixed(f64),
    /// Evaluate the objective at `grid_points` + 1 equispaced points of
    /// [0, 1] and keep the best, ties broken toward larger s.
    ExactLineSearch { grid_points: usize },
}

pub const DEFAULT_MAX_ITERS: usize = 500;
pub const DEFAULT_DIVERGENCE_GUARD: f64 = 1e12;
/// Scale of the automatic stationarity tolerance: gap <= scale * (1 + |J(x0)|).
pub const DEFAULT_GRAD_TOL_SCALE: f64 = 1e-8;

/// All solver knobs. `reg.q` must be 2; the splitting above is only valid
/// for the quadratic misfit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub reg: RegularizationParams,
    /// Surrogate weight lambda > 0; the threshold is alpha / lambda.
    pub lambda: f64,
    pub step_rule: StepRule,
    pub max_iters: usize,
    /// Stop once the stationarity gap falls to this value. `None` selects
    /// `DEFAULT_GRAD_TOL_SCALE * (1 + |J(x0)|)` at run time.
    pub grad_tol: Option<f64>,
    /// Abort with Diverged status if the objective or iterate norm
    /// exceeds this bound or turns non-finite.
    pub divergence_guard: f64,
}

impl SolverConfig {
    pub fn new(reg: RegularizationParams, lambda: f64) -> Self {
        SolverConfig {
            reg,
            lambda,
            step_rule: StepRule::Fixed(1.0),
            max_iters: DEFAULT_MAX_ITERS,
            grad_tol: None,
            divergence_guard: DEFAULT_DIVERGENCE_GUARD,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.reg.validate()?;
        if self.reg.q != 2.0 {
            return Err(Error::InvalidParam(format!(
                "the solver requires q = 2, got q = {}",
                self.reg.q
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParam(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        match self.step_rule {
            StepRule::Fixed(s) => {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::InvalidParam(format!(
                        "fixed step must be positive and finite, got {s}"
                    )));
                }
            }
            StepRule::ExactLineSearch { grid_points } => {
                if grid_points == 0 {
                    return Err(Error::InvalidParam(
                        "line-search grid needs at least one interval".into(),
                    ));
                }
            }
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParam("max_iters must be >= 1".into()));
        }
        if let Some(tol) = self.grad_tol {
            if tol.is_nan() || tol < 0.0 {
                return Err(Error::InvalidParam(format!(
                    "grad_tol must be >= 0, got {tol}"
                )));
            }
        }
        if self.divergence_guard.is_nan() || self.divergence_guard <= 0.0 {
            return Err(Error::InvalidParam(format!(
                "divergence_guard must be positive, got {}",
                self.divergence_guard
            )));
        }
        Ok(())
    }
}

/// Terminal state of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Stationarity gap fell below the tolerance (or the zero iterate was
    /// declared the solution).
    Converged,
    /// Iteration cap reached with a finite iterate.
    MaxIters,
    /// A non-finite value appeared or the divergence guard was exceeded.
    Diverged,
}

/// One row of the iteration trace: the state of iterate k plus the step
/// taken from it (0 for the final row).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub objective: f64,
    pub residual_norm: f64,
    /// Stationarity gap at this iterate; NaN on zero iterates, where the
    /// smooth part is not differentiable.
    pub gap: f64,
    pub support: usize,
    pub step: f64,
}

/// Full per-iteration trace plus the final iterate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub records: Vec<IterationRecord>,
    pub status: SolveStatus,
    pub final_iterate: Signal,
}

impl SolverTrace {
    /// Number of steps taken (index of the last recorded iterate).
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }

    pub fn final_objective(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.objective)
    }

    pub fn final_residual_norm(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.residual_norm)
    }

    pub fn final_gap(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.gap)
    }
}

// State shared by the per-iteration formulas: residual r = F(x) - y and
// the adjoint product F'(x)^* r.
struct Eval {
    residual_norm: f64,
    adjoint: Signal,
    objective: f64,
}

fn evaluate(
    model: &dyn ForwardModel,
    x: &Signal,
    y_obs: &Signal,
    reg: &RegularizationParams,
) -> Result<Eval> {
    let fx = model.apply(x)?;
    let residual = fx.sub(y_obs);
    let residual_norm = residual.norm_l2();
    let adjoint = model.jacobian_adjoint_apply(x, &residual)?;
    let objective = 0.5 * residual_norm * residual_norm + regularizer(x, reg)?;
    Ok(Eval {
        residual_norm,
        adjoint,
        objective,
    })
}

fn check_dims(model: &dyn ForwardModel, x: &Signal, y_obs: &Signal) -> Result<()> {
    let (n, m) = model.dims();
    if x.dim() != n {
        return Err(Error::DimensionMismatch {
            what: "iterate",
            expected: n,
            got: x.dim(),
        });
    }
    if y_obs.dim() != m {
        return Err(Error::DimensionMismatch {
            what: "observed data",
            expected: m,
            got: y_obs.dim(),
        });
    }
    Ok(())
}

// G'(x) = F'(x)^*(F(x) - y) - lambda*x - (beta/||x||)*x from a shared Eval.
fn gradient_from(ev: &Eval, x: &Signal, lambda: f64, beta: f64) -> Signal {
    let norm = x.norm_l2();
    let coeff = lambda + beta / norm;
    Signal::from_vec(
        ev.adjoint
            .iter()
            .zip(x.iter())
            .map(|(&a, &xi)| a - coeff * xi)
            .collect(),
    )
}

// Closed-form minimizer of <G'(x), z> + (lambda/2)||z||^2 + alpha*||z||_1:
// soft threshold of (1 + beta/(lambda*||x||))*x - F'(x)^* r / lambda.
fn direction_from(ev: &Eval, x: &Signal, cfg: &SolverConfig) -> Signal {
    let beta = cfg.reg.beta();
    let coeff = 1.0 + beta / (cfg.lambda * x.norm_l2());
    let arg = Signal::from_vec(
        x.iter()
            .zip(ev.adjoint.iter())
            .map(|(&xi, &a)| coeff * xi - a / cfg.lambda)
            .collect(),
    );
    soft_threshold_vector(&arg, cfg.reg.alpha / cfg.lambda)
}

// Phi(z) = (lambda/2)||z||^2 + alpha*||z||_1, the convex part of the split.
fn phi(z: &Signal, lambda: f64, alpha: f64) -> f64 {
    let n2 = z.norm_l2();
    0.5 * lambda * n2 * n2 + alpha * z.norm_l1()
}

fn gap_from(grad: &Signal, x: &Signal, z: &Signal, lambda: f64, alpha: f64) -> f64 {
    let value = grad.dot(&x.sub(z)) + phi(x, lambda, alpha) - phi(z, lambda, alpha);
    debug_assert!(
        value.is_nan() || value >= -1e-10,
        "stationarity gap fell below round-off: {value}"
    );
    value.max(0.0)
}

/// Gradient of the smooth part G at a nonzero iterate.
pub fn g_gradient(
    model: &dyn ForwardModel,
    x: &Signal,
    y_obs: &Signal,
    cfg: &SolverConfig,
) -> Result<Signal> {
    check_dims(model, x, y_obs)?;
    if x.is_zero() {
        return Err(Error::ZeroIterate("G'"));
    }
    let ev = evaluate(model, x, y_obs, &cfg.reg)?;
    Ok(gradient_from(&ev, x, cfg.lambda, cfg.reg.beta()))
}

/// The thresholded descent direction z minimizing the partial
/// linearization at a nonzero iterate. Every component satisfies
/// z_i + (alpha/lambda)*sign(z_i) = u_i when z_i != 0 and |u_i| <=
/// alpha/lambda when z_i = 0, with u the threshold argument.
pub fn descent_direction(
    model: &dyn ForwardModel,
    x: &Signal,
    y_obs: &Signal,
    cfg: &SolverConfig,
) -> Result<Signal> {
    cfg.validate()?;
    check_dims(model, x, y_obs)?;
    if x.is_zero() {
        return Err(Error::ZeroIterate("descent direction"));
    }
    let ev = evaluate(model, x, y_obs, &cfg.reg)?;
    Ok(direction_from(&ev, x, cfg))
}

/// Stationarity gap Psi(x) >= 0; zero exactly at first-order stationary
/// points. Uses the closed-form direction as the inner minimizer.
pub fn stationarity_gap(
    model: &dyn ForwardModel,
    x: &Signal,
    y_obs: &Signal,
    cfg: &SolverConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_dims(model, x, y_obs)?;
    if x.is_zero() {
        return Err(Error::ZeroIterate("stationarity gap"));
    }
    let ev = evaluate(model, x, y_obs, &cfg.reg)?;
    let z = direction_from(&ev, x, cfg);
    let grad = gradient_from(&ev, x, cfg.lambda, cfg.reg.beta());
    Ok(gap_from(&grad, x, &z, cfg.lambda, cfg.reg.alpha))
}

/// One plain iterative-soft-thresholding step from the zero iterate.
pub fn zero_iterate_step(
    model: &dyn ForwardModel,
    y_obs: &Signal,
    cfg: &SolverConfig,
) -> Result<Signal> {
    cfg.validate()?;
    let (n, _) = model.dims();
    let zero = Signal::zeros(n);
    check_dims(model, &zero, y_obs)?;
    let ev = evaluate(model, &zero, y_obs, &cfg.reg)?;
    let arg = ev.adjoint.scaled(-1.0 / cfg.lambda);
    Ok(soft_threshold_vector(&arg, cfg.reg.alpha / cfg.lambda))
}

/// Choose the step along x + s*(z - x) per the configured rule.
pub fn line_search(
    model: &dyn ForwardModel,
    x: &Signal,
    z: &Signal,
    y_obs: &Signal,
    cfg: &SolverConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_dims(model, x, y_obs)?;
    if z.dim() != x.dim() {
        return Err(Error::DimensionMismatch {
            what: "direction",
            expected: x.dim(),
            got: z.dim(),
        });
    }
    match cfg.step_rule {
        StepRule::Fixed(s) => Ok(s),
        StepRule::ExactLineSearch { grid_points } => {
            let dir = z.sub(x);
            let mut best: Option<(f64, f64)> = None;
            for i in 0..=grid_points {
                let s = i as f64 / grid_points as f64;
                let w = x.add_scaled(s, &dir);
                let Ok(fw) = model.apply(&w) else { continue };
                let rnorm = fw.sub(y_obs).norm_l2();
                let Ok(r) = regularizer(&w, &cfg.reg) else {
                    continue;
                };
                let j = 0.5 * rnorm * rnorm + r;
                if !j.is_finite() {
                    continue;
                }
                // <= keeps the larger s on ties
                if best.is_none_or(|(jb, _)| j <= jb) {
                    best = Some((j, s));
                }
            }
            best.map(|(_, s)| s).ok_or(Error::LineSearchDiverged)
        }
    }
}

/// Run the full two-branch iteration from `x0` and return the trace.
///
/// Divergence (non-finite values or guard overrun) is reported as a
/// status, not an error; the final iterate is the last finite one.
pub fn solve(
    model: &dyn ForwardModel,
    y_obs: &Signal,
    x0: &Signal,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    cfg.validate()?;
    check_dims(model, x0, y_obs)?;
    if !x0.all_finite() {
        return Err(Error::NonFinite("initial iterate"));
    }
    if !y_obs.all_finite() {
        return Err(Error::NonFinite("observed data"));
    }

    let lambda = cfg.lambda;
    let alpha = cfg.reg.alpha;
    let tau = alpha / lambda;
    let guard = cfg.divergence_guard;

    let mut x = x0.clone();
    let mut records = Vec::new();
    let status;

    let mut ev = match evaluate(model, &x, y_obs, &cfg.reg) {
        Ok(ev) if ev.objective.is_finite() && ev.objective <= guard => ev,
        _ => {
            return Ok(SolverTrace {
                records,
                status: SolveStatus::Diverged,
                final_iterate: x,
            });
        }
    };
    let tol = cfg
        .grad_tol
        .unwrap_or(DEFAULT_GRAD_TOL_SCALE * (1.0 + ev.objective.abs()));

    let mut k = 0;
    loop {
        let support = x.support_size();
        let next = if x.is_zero() {
            let z = soft_threshold_vector(&ev.adjoint.scaled(-1.0 / lambda), tau);
            if z.is_zero() {
                // 0 is a fixed point of the plain thresholding step:
                // declare it the solution.
                records.push(IterationRecord {
                    k,
                    objective: ev.objective,
                    residual_norm: ev.residual_norm,
                    gap: f64::NAN,
                    support,
                    step: 0.0,
                });
                status = SolveStatus::Converged;
                break;
            }
            if k == cfg.max_iters {
                records.push(IterationRecord {
                    k,
                    objective: ev.objective,
                    residual_norm: ev.residual_norm,
                    gap: f64::NAN,
                    support,
                    step: 0.0,
                });
                status = SolveStatus::MaxIters;
                break;
            }
            records.push(IterationRecord {
                k,
                objective: ev.objective,
                residual_norm: ev.residual_norm,
                gap: f64::NAN,
                support,
                step: 1.0,
            });
            z
        } else {
            let z = direction_from(&ev, &x, cfg);
            let grad = gradient_from(&ev, &x, lambda, cfg.reg.beta());
            let gap = gap_from(&grad, &x, &z, lambda, alpha);
            if gap <= tol {
                records.push(IterationRecord {
                    k,
                    objective: ev.objective,
                    residual_norm: ev.residual_norm,
                    gap,
                    support,
                    step: 0.0,
                });
                status = SolveStatus::Converged;
                break;
            }
            if k == cfg.max_iters {
                records.push(IterationRecord {
                    k,
                    objective: ev.objective,
                    residual_norm: ev.residual_norm,
                    gap,
                    support,
                    step: 0.0,
                });
                status = SolveStatus::MaxIters;
                break;
            }
            let step = match line_search(model, &x, &z, y_obs, cfg) {
                Ok(s) => s,
                Err(Error::LineSearchDiverged) => {
                    records.push(IterationRecord {
                        k,
                        objective: ev.objective,
                        residual_norm: ev.residual_norm,
                        gap,
                        support,
                        step: 0.0,
                    });
                    status = SolveStatus::Diverged;
                    break;
                }
                Err(e) => return Err(e),
            };
            records.push(IterationRecord {
                k,
                objective: ev.objective,
                residual_norm: ev.residual_norm,
                gap,
                support,
                step,
            });
            if step == 1.0 {
                z
            } else {
                x.add_scaled(step, &z.sub(&x))
            }
        };

        match evaluate(model, &next, y_obs, &cfg.reg) {
            Ok(next_ev)
                if next_ev.objective.is_finite()
                    && next_ev.objective <= guard
                    && next.norm_l2() <= guard =>
            {
                x = next;
                ev = next_ev;
                k += 1;
            }
            _ => {
                status = SolveStatus::Diverged;
                break;
            }
        }
    }

    Ok(SolverTrace {
        records,
        status,
        final_iterate: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{DenseMatrix, NonlinearCsModel, OperatorForm};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn linear_model(rows: &[Vec<f64>]) -> NonlinearCsModel {
        NonlinearCsModel::new(
            DenseMatrix::from_rows(rows).unwrap(),
            1,
            1,
            OperatorForm::PurePower,
        )
        .unwrap()
    }

    fn config(alpha: f64, eta: f64, lambda: f64) -> SolverConfig {
        SolverConfig::new(
            RegularizationParams::new(alpha, eta, 2.0).unwrap(),
            lambda,
        )
    }

    #[test]
    fn gradient_reduces_to_misfit_when_beta_and_lambda_vanish() {
        let model = linear_model(&[vec![2.0, 0.0], vec![0.0, 3.0]]);
        let x = Signal::from_vec(vec![1.0, -1.0]);
        let y = Signal::from_vec(vec![1.0, 1.0]);
        // lambda = 0 skips config validation on purpose: g_gradient itself
        // only needs x != 0.
        let cfg = SolverConfig {
            lambda: 0.0,
            ..config(1.0, 0.0, 1.0)
        };
        let g = g_gradient(&model, &x, &y, &cfg).unwrap();
        let residual = model.apply(&x).unwrap().sub(&y);
        let expected = model.jacobian_adjoint_apply(&x, &residual).unwrap();
        assert!(g.sub(&expected).norm_linf() < 1e-15);
    }

    #[test]
    fn gradient_hand_check_on_linear_2x2() {
        // F = A, ||x|| = 1, beta = lambda = 1: G' = A^T(Ax - y) - 2x
        let model = linear_model(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        let x = Signal::from_vec(vec![0.6, 0.8]);
        let y = Signal::from_vec(vec![1.0, -1.0]);
        let cfg = config(1.0, 1.0, 1.0);
        let g = g_gradient(&model, &x, &y, &cfg).unwrap();
        let ax = model.matrix().matvec(&x);
        let atr = model.matrix().matvec_transpose(&ax.sub(&y));
        let expected = atr.sub(&x.scaled(2.0));
        assert!(g.sub(&expected).norm_linf() < 1e-12);
    }

    #[test]
    fn gradient_rejects_zero_iterate() {
        let model = linear_model(&[vec![1.0]]);
        let cfg = config(1.0, 1.0, 1.0);
        let err = g_gradient(
            &model,
            &Signal::zeros(1),
            &Signal::from_vec(vec![1.0]),
            &cfg,
        );
        assert!(matches!(err, Err(Error::ZeroIterate(_))));
    }

    #[test]
    fn gradient_matches_finite_differences_of_scalar_g() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let a = DenseMatrix::from_fn(5, 8, |_, _| rng.gen_range(-0.5..0.5));
        let model = NonlinearCsModel::new(a, 2, 3, OperatorForm::Additive).unwrap();
        let x = Signal::from_vec((0..8).map(|_| rng.gen_range(-0.9..0.9)).collect());
        let y = model
            .apply(&Signal::from_vec(
                (0..8).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            ))
            .unwrap();
        let cfg = config(0.3, 0.8, 2.5);
        let beta = cfg.reg.beta();
        let scalar_g = |p: &Signal| -> f64 {
            let r = model.apply(p).unwrap().sub(&y).norm_l2();
            let n2 = p.norm_l2();
            0.5 * r * r - 0.5 * cfg.lambda * n2 * n2 - beta * n2
        };
        let g = g_gradient(&model, &x, &y, &cfg).unwrap();
        let h = 1e-6;
        for trial in 0..5 {
            let mut rng2 = ChaCha8Rng::seed_from_u64(100 + trial);
            let v = Signal::from_vec((0..8).map(|_| rng2.gen_range(-1.0..1.0)).collect());
            let fd =
                (scalar_g(&x.add_scaled(h, &v)) - scalar_g(&x.add_scaled(-h, &v))) / (2.0 * h);
            let analytic = g.dot(&v);
            let scale = analytic.abs().max(1.0);
            assert!(
                (fd - analytic).abs() / scale <= 1e-5,
                "directional derivative mismatch: fd {fd} vs {analytic}"
            );
        }
    }

    #[test]
    fn direction_reduces_to_ista_when_beta_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let a = DenseMatrix::from_fn(4, 6, |_, _| rng.gen_range(-0.5..0.5));
        let model = NonlinearCsModel::new(a, 2, 1, OperatorForm::Additive).unwrap();
        let x = Signal::from_vec((0..6).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let y = Signal::from_vec((0..4).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let cfg = config(0.2, 0.0, 3.0);
        let z = descent_direction(&model, &x, &y, &cfg).unwrap();
        let residual = model.apply(&x).unwrap().sub(&y);
        let adj = model.jacobian_adjoint_apply(&x, &residual).unwrap();
        let ista_arg = Signal::from_vec(
            x.iter()
                .zip(adj.iter())
                .map(|(&xi, &ai)| xi - ai / cfg.lambda)
                .collect(),
        );
        let ista = soft_threshold_vector(&ista_arg, cfg.reg.alpha / cfg.lambda);
        assert_eq!(z, ista);
    }

    #[test]
    fn direction_is_zero_when_threshold_swallows_everything() {
        let model = linear_model(&[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let x = Signal::from_vec(vec![0.1, -0.1]);
        let y = Signal::from_vec(vec![0.2, 0.3]);
        let cfg = config(1e6, 1.0, 1.0);
        let z = descent_direction(&model, &x, &y, &cfg).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn direction_satisfies_componentwise_optimality() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let a = DenseMatrix::from_fn(5, 8, |_, _| rng.gen_range(-0.5..0.5));
        let model = NonlinearCsModel::new(a, 2, 3, OperatorForm::Additive).unwrap();
        let x = Signal::from_vec((0..8).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let y = Signal::from_vec((0..5).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let cfg = config(0.15, 0.9, 2.0);
        let z = descent_direction(&model, &x, &y, &cfg).unwrap();
        let tau = cfg.reg.alpha / cfg.lambda;
        // reconstruct the threshold argument
        let residual = model.apply(&x).unwrap().sub(&y);
        let adj = model.jacobian_adjoint_apply(&x, &residual).unwrap();
        let coeff = 1.0 + cfg.reg.beta() / (cfg.lambda * x.norm_l2());
        for i in 0..8 {
            let u = coeff * x[i] - adj[i] / cfg.lambda;
            if z[i] != 0.0 {
                assert!((z[i] + tau * z[i].signum() - u).abs() < 1e-12);
            } else {
                assert!(u.abs() <= tau + 1e-12);
            }
        }
    }

    #[test]
    fn fixed_line_search_returns_constant() {
        let model = linear_model(&[vec![1.0]]);
        let x = Signal::from_vec(vec![1.0]);
        let z = Signal::from_vec(vec![0.5]);
        let y = Signal::from_vec(vec![0.0]);
        let cfg = config(0.1, 0.0, 1.0);
        assert_eq!(line_search(&model, &x, &z, &y, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn degenerate_segment_returns_full_step() {
        let model = linear_model(&[vec![1.0]]);
        let x = Signal::from_vec(vec![0.7]);
        let y = Signal::from_vec(vec![0.0]);
        let mut cfg = config(0.1, 0.0, 1.0);
        cfg.step_rule = StepRule::ExactLineSearch { grid_points: 32 };
        // z == x: objective constant along the segment, tie rule gives 1
        assert_eq!(line_search(&model, &x, &x, &y, &cfg).unwrap(), 1.0);
    }

    #[test]
    fn grid_search_finds_interior_parabola_minimum() {
        // F = identity, alpha = 0: J(s) = 0.5*(x + s(z-x) - y)^2 is a
        // parabola in s with minimum at s* = 0.4 for this data.
        let model = linear_model(&[vec![1.0]]);
        let x = Signal::from_vec(vec![0.0]);
        let z = Signal::from_vec(vec![1.0]);
        let y = Signal::from_vec(vec![0.4]);
        let mut cfg = config(0.0, 0.0, 1.0);
        cfg.step_rule = StepRule::ExactLineSearch { grid_points: 1000 };
        let s = line_search(&model, &x, &z, &y, &cfg).unwrap();
        assert!((s - 0.4).abs() <= 1e-3);
    }

    #[test]
    fn zero_step_with_consistent_data_stays_zero() {
        let model = NonlinearCsModel::new(
            DenseMatrix::from_rows(&[vec![1.0, -0.5]]).unwrap(),
            2,
            3,
            OperatorForm::Additive,
        )
        .unwrap();
        // y = F(0) = 0 for the additive form
        let y = model.apply(&Signal::zeros(2)).unwrap();
        let cfg = config(0.5, 1.0, 2.0);
        let x1 = zero_iterate_step(&model, &y, &cfg).unwrap();
        assert!(x1.is_zero());
    }

    #[test]
    fn zero_step_is_thresholded_adjoint_for_linear_model() {
        let model = linear_model(&[vec![1.0, 2.0], vec![-1.0, 0.5]]);
        let y = Signal::from_vec(vec![2.0, 1.0]);
        let cfg = config(0.3, 0.0, 1.0);
        let x1 = zero_iterate_step(&model, &y, &cfg).unwrap();
        let expected = soft_threshold_vector(&model.matrix().matvec_transpose(&y), 0.3);
        assert!(x1.sub(&expected).norm_linf() < 1e-15);
    }

    #[test]
    fn zero_step_dead_zone_returns_zero() {
        let model = linear_model(&[vec![1.0, 2.0]]);
        let y = Signal::from_vec(vec![0.5]);
        let cfg = config(100.0, 0.0, 1.0);
        assert!(zero_iterate_step(&model, &y, &cfg).unwrap().is_zero());
    }

    #[test]
    fn gap_is_zero_at_soft_threshold_fixed_point() {
        // 1-D, F(x) = x, beta = 0: x* = y - alpha solves the problem for
        // y > alpha, and the inner minimizer equals x* there.
        let model = linear_model(&[vec![1.0]]);
        let y = Signal::from_vec(vec![1.0]);
        let alpha = 0.25;
        let cfg = config(alpha, 0.0, 2.0);
        let xstar = Signal::from_vec(vec![1.0 - alpha]);
        let gap = stationarity_gap(&model, &xstar, &y, &cfg).unwrap();
        assert!(gap <= 1e-10, "gap {gap} at the exact minimizer");
    }

    #[test]
    fn gap_positive_away_from_stationarity() {
        let model = linear_model(&[vec![1.0]]);
        let y = Signal::from_vec(vec![1.0]);
        let cfg = config(0.25, 0.0, 2.0);
        let gap = stationarity_gap(&model, &Signal::from_vec(vec![0.2]), &y, &cfg).unwrap();
        assert!(gap > 1e-3);
    }

    #[test]
    fn solve_one_dimensional_soft_threshold_problem() {
        // min 0.5*(x-1)^2 + 0.1|x| has solution 0.9; from x0 = 0 the first
        // step already lands there.
        let model = linear_model(&[vec![1.0]]);
        let y = Signal::from_vec(vec![1.0]);
        let cfg = config(0.1, 0.0, 1.0);
        let trace = solve(&model, &y, &Signal::zeros(1), &cfg).unwrap();
        assert_eq!(trace.status, SolveStatus::Converged);
        assert!((trace.final_iterate[0] - 0.9).abs() < 1e-12);
        assert!(trace.iterations() <= 2);
    }

    #[test]
    fn solve_records_monotone_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let a = DenseMatrix::from_fn(6, 10, |_, _| rng.gen_range(-0.3..0.3));
        let model = NonlinearCsModel::new(a, 2, 3, OperatorForm::Additive).unwrap();
        let xt = Signal::from_vec(
            (0..10)
                .map(|i| if i % 4 == 0 { rng.gen_range(-1.0..1.0) } else { 0.0 })
                .collect(),
        );
        let y = model.apply(&xt).unwrap();
        let cfg = config(0.05, 1.0, 4.0);
        let trace = solve(&model, &y, &Signal::constant(10, 1e-6), &cfg).unwrap();
        assert_ne!(trace.status, SolveStatus::Diverged);
        for pair in trace.records.windows(2) {
            assert!(
                pair[1].objective <= pair[0].objective + 1e-10,
                "objective rose from {} to {}",
                pair[0].objective,
                pair[1].objective
            );
        }
    }

    #[test]
    fn solve_diverges_with_oversized_step() {
        let mut rng = ChaCha8Rng::seed_from_u64(59);
        let a = DenseMatrix::from_fn(6, 10, |_, _| rng.gen_range(-0.3..0.3));
        let model = NonlinearCsModel::new(a, 2, 3, OperatorForm::Additive).unwrap();
        let xt = Signal::from_vec(
            (0..10)
                .map(|i| if i % 4 == 0 { rng.gen_range(-1.0..1.0) } else { 0.0 })
                .collect(),
        );
        let y = model.apply(&xt).unwrap();
        let mut cfg = config(0.05, 1.0, 4.0);
        cfg.step_rule = StepRule::Fixed(50.0);
        let trace = solve(&model, &y, &Signal::constant(10, 1e-6), &cfg).unwrap();
        assert_eq!(trace.status, SolveStatus::Diverged);
        assert!(trace.final_iterate.all_finite());
    }

    #[test]
    fn solve_rejects_bad_config() {
        let model = linear_model(&[vec![1.0]]);
        let y = Signal::from_vec(vec![1.0]);
        let mut cfg = config(0.1, 0.0, 1.0);
        cfg.reg.q = 1.0;
        assert!(solve(&model, &y, &Signal::zeros(1), &cfg).is_err());
        let mut cfg = config(0.1, 0.0, 1.0);
        cfg.lambda = -1.0;
        assert!(solve(&model, &y, &Signal::zeros(1), &cfg).is_err());
    }

    #[test]
    fn solve_stops_at_zero_fixed_point() {
        // y = F(0) and a huge threshold: 0 is declared the solution.
        let model = linear_model(&[vec![1.0]]);
        let y = Signal::from_vec(vec![0.0]);
        let cfg = config(10.0, 0.0, 1.0);
        let trace = solve(&model, &y, &Signal::zeros(1), &cfg).unwrap();
        assert_eq!(trace.status, SolveStatus::Converged);
        assert!(trace.final_iterate.is_zero());
        assert_eq!(trace.iterations(), 0);
    }
}
