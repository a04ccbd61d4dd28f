//! Slow reference computations used to cross-check the fast paths:
//! a grid-search solver for the per-component direction subproblem and a
//! finite-difference sweep over Jacobian products. These never share code
//! with the closed-form implementations they validate.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::operators::{finite_difference_jacobian_apply, ForwardModel};
use crate::signal::Signal;
use crate::solver::{descent_direction, g_gradient, SolverConfig};

/// Minimize g*z + (lambda/2)*z^2 + alpha*|z| over z by dense grid search
/// with repeated window refinement, never using the soft-threshold
/// closed form. Value comparison in f64 resolves the minimizer of a
/// quadratic to about sqrt(machine epsilon), so the result is accurate
/// to roughly 1e-8 absolute, an order below the 1e-6 check tolerance.
pub fn direction_component_grid_search(g: f64, lambda: f64, alpha: f64) -> f64 {
    let value = |z: f64| g * z + 0.5 * lambda * z * z + alpha * z.abs();
    // any minimizer satisfies |z| <= |g|/lambda
    let mut center = 0.0;
    let mut half_width = g.abs() / lambda + 1.0;
    let mut best = 0.0;
    for round in 0..8 {
        let points = if round == 0 { 4001 } else { 101 };
        let mut best_val = f64::INFINITY;
        for i in 0..points {
            let z = center - half_width + 2.0 * half_width * i as f64 / (points - 1) as f64;
            let v = value(z);
            if v < best_val {
                best_val = v;
                best = z;
            }
        }
        center = best;
        half_width = 2.0 * (2.0 * half_width / (points - 1) as f64);
    }
    // the exact zero is always a candidate; prefer it on near-ties so the
    // sparsity pattern matches
    if value(0.0) <= value(best) {
        0.0
    } else {
        best
    }
}

/// Result of a sampled comparison between two computations.
#[derive(Clone, Debug)]
pub struct CheckReport {
    pub max_error: f64,
    pub samples: usize,
    /// The sample index attaining the maximum, for diagnostics.
    pub worst_sample: usize,
}

/// Compare analytic Jacobian products against central finite differences
/// on `samples` random (x, v) pairs with entries in [-1, 1].
/// Reports the maximum relative l2 error.
pub fn check_jacobian(
    model: &dyn ForwardModel,
    samples: usize,
    h: f64,
    seed: u64,
) -> Result<CheckReport> {
    let (n, _) = model.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_error = 0.0_f64;
    let mut worst_sample = 0;
    for s in 0..samples {
        let x = Signal::from_vec((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let v = Signal::from_vec((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let analytic = model.jacobian_apply(&x, &v)?;
        let fd = finite_difference_jacobian_apply(model, &x, &v, h)?;
        let scale = analytic.norm_l2().max(1e-12);
        let err = fd.sub(&analytic).norm_l2() / scale;
        if err > max_error {
            max_error = err;
            worst_sample = s;
        }
    }
    Ok(CheckReport {
        max_error,
        samples,
        worst_sample,
    })
}

/// Compare the closed-form descent direction against the grid-search
/// oracle, componentwise, on `samples` random nonzero iterates.
/// Reports the maximum absolute component error.
pub fn check_direction(
    model: &dyn ForwardModel,
    y_obs: &Signal,
    cfg: &SolverConfig,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let (n, _) = model.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_error = 0.0_f64;
    let mut worst_sample = 0;
    for s in 0..samples {
        let x = Signal::from_vec((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
        let z = descent_direction(model, &x, y_obs, cfg)?;
        let grad = g_gradient(model, &x, y_obs, cfg)?;
        for i in 0..n {
            let oracle = direction_component_grid_search(grad[i], cfg.lambda, cfg.reg.alpha);
            let err = (z[i] - oracle).abs();
            if err > max_error {
                max_error = err;
                worst_sample = s;
            }
        }
    }
    Ok(CheckReport {
        max_error,
        samples,
        worst_sample,
    })
}
