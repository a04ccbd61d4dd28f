//! The sparsity penalty alpha*||x||_1 - beta*||x||_2, the composite
//! objective built on it, and soft thresholding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Parameters of the penalty alpha*||x||_1 - beta*||x||_2 with
/// beta = eta * alpha, plus the residual exponent q of the data-misfit
/// term (1/q)*||F(x) - y||^q.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizationParams {
    /// Penalty weight, alpha >= 0.
    pub alpha: f64,
    /// Ratio beta/alpha in [0, 1]; eta = 0 is plain l1, eta = 1 is l1 - l2.
    pub eta: f64,
    /// Residual exponent, q >= 1. The solver requires q = 2; the general
    /// exponent is kept for objective evaluation in experiment code.
    pub q: f64,
}

impl RegularizationParams {
    pub fn new(alpha: f64, eta: f64, q: f64) -> Result<Self> {
        let p = RegularizationParams { alpha, eta, q };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "alpha must be finite and >= 0, got {}",
                self.alpha
            )));
        }
        if !(self.eta.is_finite() && (0.0..=1.0).contains(&self.eta)) {
            return Err(Error::InvalidParam(format!(
                "eta must lie in [0, 1], got {}",
                self.eta
            )));
        }
        if !(self.q.is_finite() && self.q >= 1.0) {
            return Err(Error::InvalidParam(format!(
                "q must be >= 1, got {}",
                self.q
            )));
        }
        Ok(())
    }

    /// The l2 weight beta = eta * alpha. Always satisfies alpha >= beta >= 0.
    pub fn beta(&self) -> f64 {
        self.eta * self.alpha
    }
}

/// Evaluate alpha*||x||_1 - beta*||x||_2.
///
/// The result is nonnegative whenever alpha >= beta since ||x||_1 >= ||x||_2;
/// round-off can produce a tiny negative value for near-one-hot vectors, which
/// is clamped to zero so the invariant holds exactly.
pub fn regularizer(x: &Signal, p: &RegularizationParams) -> Result<f64> {
    p.validate()?;
    if !x.all_finite() {
        return Err(Error::NonFinite("regularizer input"));
    }
    let l1 = x.norm_l1();
    let value = p.alpha * l1 - p.beta() * x.norm_l2();
    if value < 0.0 && value.abs() < 1e-12 * p.alpha * l1 {
        return Ok(0.0);
    }
    Ok(value)
}

/// The full objective (1/q)*residual_norm^q + alpha*||x||_1 - beta*||x||_2,
/// with the residual norm supplied by the caller.
pub fn objective(x: &Signal, residual_norm: f64, p: &RegularizationParams) -> Result<f64> {
    if residual_norm.is_nan() || residual_norm < 0.0 {
        return Err(Error::InvalidParam(format!(
            "residual norm must be >= 0, got {residual_norm}"
        )));
    }
    Ok(residual_norm.powf(p.q) / p.q + regularizer(x, p)?)
}

/// Scalar soft threshold: shrink `t` toward zero by `tau`, with a dead zone
/// on (-tau, tau).
pub fn soft_threshold_scalar(t: f64, tau: f64) -> f64 {
    debug_assert!(tau >= 0.0);
    if t >= tau {
        t - tau
    } else if t <= -tau {
        t + tau
    } else {
        0.0
    }
}

/// Componentwise soft threshold.
pub fn soft_threshold_vector(x: &Signal, tau: f64) -> Signal {
    x.map(|t| soft_threshold_scalar(t, tau))
}
