//! Recovery-quality metrics.

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Reported in place of +inf when the reconstruction is exact; the
/// squared-error ratio bottoms out around 1e-31 in double precision.
pub const SNR_CAP_DB: f64 = 310.0;

/// Signal-to-noise ratio -10*log10(||x* - xt||^2 / ||xt||^2) in dB.
pub fn snr_db(x_star: &Signal, x_true: &Signal) -> Result<f64> {
    if x_true.dim() != x_star.dim() {
        return Err(Error::DimensionMismatch {
            what: "snr operands",
            expected: x_true.dim(),
            got: x_star.dim(),
        });
    }
    let true_norm = x_true.norm_l2();
    if true_norm == 0.0 {
        return Err(Error::InvalidParam(
            "snr is undefined for a zero reference signal".into(),
        ));
    }
    let err = x_star.sub(x_true).norm_l2();
    if err == 0.0 {
        return Ok(SNR_CAP_DB);
    }
    let ratio = (err / true_norm).powi(2);
    Ok((-10.0 * ratio.log10()).min(SNR_CAP_DB))
}

/// Relative error ||x* - xt|| / ||xt||. Satisfies e = 10^(-SNR/20).
pub fn relative_error(x_star: &Signal, x_true: &Signal) -> Result<f64> {
    let true_norm = x_true.norm_l2();
    if true_norm == 0.0 {
        return Err(Error::InvalidParam(
            "relative error is undefined for a zero reference signal".into(),
        ));
    }
    Ok(x_star.sub(x_true).norm_l2() / true_norm)
}

/// Fraction of true spikes of each sign recovered with a nonzero entry of
/// the matching sign: (positive recall, negative recall). A side with no
/// true spikes reports `None`.
pub fn signed_support_recall(
    x_star: &Signal,
    x_true: &Signal,
) -> (Option<f64>, Option<f64>) {
    let mut pos_total = 0usize;
    let mut pos_hit = 0usize;
    let mut neg_total = 0usize;
    let mut neg_hit = 0usize;
    for (&t, &r) in x_true.iter().zip(x_star.iter()) {
        if t > 0.0 {
            pos_total += 1;
            if r > 0.0 {
                pos_hit += 1;
            }
        } else if t < 0.0 {
            neg_total += 1;
            if r < 0.0 {
                neg_hit += 1;
            }
        }
    }
    let frac = |hit: usize, total: usize| {
        (total > 0).then(|| hit as f64 / total as f64)
    };
    (frac(pos_hit, pos_total), frac(neg_hit, neg_total))
}

/// Median of a slice (average of the middle pair for even lengths).
/// Returns `None` on empty input.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("median of NaN"));
    let mid = sorted.len() / 2;
    Some(if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    })
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}
