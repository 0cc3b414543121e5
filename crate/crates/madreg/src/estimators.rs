//! MAD estimators and bias-correction machinery.
//!
//! Four estimators of the scale gamma: the infeasible gamma_bar (criterion
//! at the true coefficients), the plug-in gamma_hat (minimized criterion),
//! the exact correction gamma_tilde = gamma_hat / (1 - c) with
//! c = (p/n) / (4 f(0)), and the empirical correction gamma_check using a
//! kernel density estimate of f(0) from standardized residuals.

use crate::design::DesignMatrix;
use crate::error::{Error, Result};
use crate::l1fit::mad_criterion;

/// All estimates produced for one data set. Fields may be NaN when the
/// corresponding correction is undefined (see `simulation::FailureFlags`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorSet {
    /// Criterion at the true coefficients; simulation only.
    pub gamma_bar: f64,
    /// Minimized criterion.
    pub gamma_hat: f64,
    /// Exact bias correction gamma_hat / (1 - c_exact).
    pub gamma_tilde: f64,
    /// Empirical bias correction gamma_hat / (1 - c_hat).
    pub gamma_check: f64,
    pub c_exact: f64,
    pub c_hat: f64,
    /// Kernel density estimate of f(0) on standardized residuals.
    pub f0_hat: f64,
}

/// Criterion evaluated at the true coefficients: unbiased for gamma but
/// unavailable outside simulation.
pub fn gamma_bar(x: &DesignMatrix, y: &[f64], beta_true: &[f64]) -> Result<f64> {
    mad_criterion(x, y, beta_true)
}

/// Leading relative bias c = (p/n) / (4 f0) of the plug-in estimator.
pub fn exact_correction_factor(p: usize, n: usize, f0: f64) -> Result<f64> {
    assert!(n > 0, "n must be positive");
    assert!(f0 > 0.0, "f0 must be positive");
    let c = (p as f64 / n as f64) / (4.0 * f0);
    if c >= 1.0 {
        return Err(Error::CorrectionTooLarge { c });
    }
    Ok(c)
}

/// Bias-reduced estimator gamma_hat / (1 - c).
pub fn gamma_tilde(gamma_hat: f64, c: f64) -> Result<f64> {
    assert!(c >= 0.0, "correction factor must be nonnegative");
    if c >= 1.0 {
        return Err(Error::CorrectionTooLarge { c });
    }
    Ok(gamma_hat / (1.0 - c))
}

/// Empirical bias-reduced estimator gamma_hat / (1 - c_hat) with
/// c_hat = (p/n) / (4 f0_hat). Bit-identical to `gamma_tilde` when f0_hat
/// equals the true density.
pub fn gamma_check(gamma_hat: f64, p: usize, n: usize, f0_hat: f64) -> Result<f64> {
    let c_hat = exact_correction_factor(p, n, f0_hat)?;
    gamma_tilde(gamma_hat, c_hat)
}

/// Bandwidth rule for the kernel density estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bandwidth {
    /// h = 0.9 * min(sd, IQR/1.34) * n^(-1/5)
    Silverman,
    Fixed(f64),
}

/// Silverman's rule-of-thumb bandwidth. Falls back to the standard
/// deviation alone when the interquartile range collapses.
pub fn silverman_bandwidth(sample: &[f64]) -> Result<f64> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "bandwidth needs at least 2 observations, got {n}"
        )));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let sd = (sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let mut scale = sd.min(iqr / 1.34);
    if scale <= 0.0 {
        scale = sd;
    }
    if scale <= 0.0 {
        return Err(Error::DegenerateSample);
    }
    Ok(0.9 * scale * (n as f64).powf(-0.2))
}

/// Gaussian-kernel density estimate at zero:
/// (1 / (n h)) * sum_i phi(r_i / h).
pub fn kde_f0(residuals: &[f64], bandwidth: Bandwidth) -> Result<f64> {
    let n = residuals.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "KDE needs at least 2 observations, got {n}"
        )));
    }
    let h = match bandwidth {
        Bandwidth::Silverman => silverman_bandwidth(residuals)?,
        Bandwidth::Fixed(h) => {
            assert!(h > 0.0, "bandwidth must be positive");
            h
        }
    };
    // Summing in sorted order makes the estimate exactly invariant to
    // permutations of the input.
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let inv_sqrt_2pi = 0.3989422804014327;
    let sum: f64 = sorted
        .iter()
        .map(|r| {
            let z = r / h;
            (-0.5 * z * z).exp() * inv_sqrt_2pi
        })
        .sum();
    Ok(sum / (n as f64 * h))
}

/// Chi-square gap diagnostic T = n (gamma_bar - gamma_hat) 4 f0 / gamma.
/// Approximately chi-square with p degrees of freedom under the model.
pub fn gap_statistic(
    gamma_bar: f64,
    gamma_hat: f64,
    n: usize,
    f0: f64,
    gamma_true: f64,
) -> Result<f64> {
    assert!(f0 > 0.0, "f0 must be positive");
    assert!(gamma_true > 0.0, "gamma_true must be positive");
    if gamma_bar < gamma_hat {
        return Err(Error::NegativeGap {
            gamma_bar,
            gamma_hat,
        });
    }
    Ok(n as f64 * (gamma_bar - gamma_hat) * 4.0 * f0 / gamma_true)
}

/// Type-7 (linear interpolation) quantile of pre-sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = pos - lo as f64;
        sorted[lo] * (1.0 - frac) + sorted[hi] * frac
    }
}
