//! Order-statistic transforms and the weight functions shared by every
//! estimator in this crate.
//!
//! For a sample of size `n` and a number of extremes `k`, the scaled
//! log-ratios of adjacent top spacings
//!
//! ```text
//! Y_j = j * log( (X_(n-j+1) - X_(n-k)) / (X_(n-j) - X_(n-k)) ),   j = 1..k-1
//! ```
//!
//! are approximately independent exponentials with mean
//! `theta_j = gamma / (1 - (j/(k+1))^gamma)`, which is what turns tail-index
//! estimation into a one-parameter exponential regression. The log excesses
//! `Z_j = log X_(n-j+1) - log X_(n-k)` feed the comparator estimators.

use crate::error::{Error, Result};

/// Below this |gamma| the closed forms collapse to their gamma -> 0 limits;
/// the direct expressions lose all precision there.
pub(crate) const GAMMA_BRANCH_EPS: f64 = 1e-6;

/// Scaled log-ratios `Y_1..Y_{k-1}` of the top order-statistic spacings,
/// together with the number of extremes `k` they were built from.
///
/// The values are invariant under `x -> a*x + b` with `a > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledLogRatios {
    y: Vec<f64>,
    k: usize,
}

impl ScaledLogRatios {
    /// Wrap precomputed ratios, checking the length contract. Used for
    /// synthetic exponential-regression data where the `Y_j` are drawn
    /// directly rather than transformed from a raw sample.
    pub fn from_parts(y: Vec<f64>, k: usize) -> Result<Self> {
        if k < 2 || y.len() != k - 1 {
            return Err(Error::InvalidParam(format!(
                "need k >= 2 and exactly k-1 values, got k = {k} with {} values",
                y.len()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParam("non-finite scaled log-ratio".into()));
        }
        Ok(Self { y, k })
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

/// Log excesses `Z_1..Z_k` over the threshold order statistic, largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct LogExcesses {
    z: Vec<f64>,
    k: usize,
}

impl LogExcesses {
    pub fn values(&self) -> &[f64] {
        &self.z
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

fn sorted_finite(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParam(
            "sample contains non-finite values".into(),
        ));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    Ok(xs)
}

fn check_distinct_top(xs: &[f64], count: usize) -> Result<()> {
    let n = xs.len();
    for w in xs[n - count..].windows(2) {
        if w[0] == w[1] {
            return Err(Error::Tie(count));
        }
    }
    Ok(())
}

/// Transform a raw sample into the scaled log-ratios `Y_1..Y_{k-1}`.
///
/// Requires `2 <= k < n` and strictly increasing top `k+1` order statistics;
/// ties are a hard error rather than being jittered away, since silent jitter
/// would break reproducibility.
pub fn scaled_log_ratios(sample: &[f64], k: usize) -> Result<ScaledLogRatios> {
    let n = sample.len();
    if k < 2 || k >= n {
        return Err(Error::Size { n, k });
    }
    let xs = sorted_finite(sample)?;
    check_distinct_top(&xs, k + 1)?;
    let threshold = xs[n - k - 1]; // X_(n-k)
    let mut y = Vec::with_capacity(k - 1);
    for j in 1..k {
        let num = xs[n - j] - threshold; // X_(n-j+1) - X_(n-k)
        let den = xs[n - j - 1] - threshold; // X_(n-j) - X_(n-k)
        y.push(j as f64 * (num / den).ln());
    }
    Ok(ScaledLogRatios { y, k })
}

/// Transform a raw sample into the log excesses `Z_1..Z_k`.
///
/// Requires `1 <= k < n`, a strictly positive threshold order statistic
/// `X_(n-k)`, and distinct top `k+1` order statistics.
pub fn log_excesses(sample: &[f64], k: usize) -> Result<LogExcesses> {
    let n = sample.len();
    if k < 1 || k >= n {
        return Err(Error::Size { n, k });
    }
    let xs = sorted_finite(sample)?;
    let threshold = xs[n - k - 1];
    if threshold <= 0.0 {
        return Err(Error::Positivity(threshold));
    }
    check_distinct_top(&xs, k + 1)?;
    let log_threshold = threshold.ln();
    let z = (1..=k).map(|j| xs[n - j].ln() - log_threshold).collect();
    Ok(LogExcesses { z, k })
}

/// Mean function of the exponential regression model,
/// `theta(gamma, u) = gamma / (1 - u^gamma)`, with the continuous extension
/// `-1 / log u` on the gamma -> 0 branch. Strictly positive for every real
/// gamma and `u` in (0, 1).
pub fn theta(gamma: f64, u: f64) -> f64 {
    debug_assert!(u > 0.0 && u < 1.0, "u = {u} out of (0,1)");
    theta_ln(gamma, u.ln())
}

/// `theta` with `log u` precomputed; the hot loops call this.
pub(crate) fn theta_ln(gamma: f64, ln_u: f64) -> f64 {
    if gamma.abs() < GAMMA_BRANCH_EPS {
        -1.0 / ln_u
    } else {
        // gamma / (1 - u^gamma) without cancellation as u -> 1
        -gamma / (gamma * ln_u).exp_m1()
    }
}

/// `log u` computed from whichever of `u` and `1 - u` carries the precision.
pub(crate) fn ln_from_parts(u: f64, one_minus_u: f64) -> f64 {
    if u < 0.5 {
        u.ln()
    } else {
        (-one_minus_u).ln_1p()
    }
}

/// Score weight `(u^gamma - 1 - gamma u^gamma log u) / gamma^2`, with the
/// limit `-(log u)^2 / 2` on the gamma -> 0 branch.
pub fn j_weight(gamma: f64, u: f64) -> f64 {
    debug_assert!(u > 0.0 && u < 1.0, "u = {u} out of (0,1)");
    j_weight_ln(gamma, u.ln())
}

/// `j_weight` with `log u` precomputed.
pub(crate) fn j_weight_ln(gamma: f64, ln_u: f64) -> f64 {
    if gamma.abs() < GAMMA_BRANCH_EPS {
        -0.5 * ln_u * ln_u
    } else {
        // (u^g - 1 - g u^g ln u) / g^2 = (expm1(w)(1 - w) - w) / g^2, w = g ln u
        let w = gamma * ln_u;
        (w.exp_m1() * (1.0 - w) - w) / (gamma * gamma)
    }
}

/// Product `j_weight * theta` with `log u` precomputed, in a form that stays
/// finite for strongly negative gamma deep in the left tail, where the two
/// factors overflow and underflow separately.
pub(crate) fn j_weight_times_theta_ln(gamma: f64, ln_u: f64) -> f64 {
    if gamma < -GAMMA_BRANCH_EPS {
        let neg = (-gamma * ln_u).exp_m1(); // u^{-gamma} - 1, in (-1, 0)
        let core = -neg - gamma * ln_u;
        core / (gamma * neg)
    } else {
        j_weight_ln(gamma, ln_u) * theta_ln(gamma, ln_u)
    }
}

/// Down-weighted score weight used by the divergence estimating equation.
///
/// Computed as `j_weight * theta^(-alpha)`, which agrees with the expanded
/// form `(u^gamma - 1 - gamma u^gamma log u)(1 - u^gamma)^alpha gamma^(-alpha-2)`
/// for `gamma > 0` and stays real for `gamma <= 0`, where the expanded form
/// would raise a negative base to a fractional power.
pub fn j_alpha_weight(gamma: f64, u: f64, alpha: f64) -> f64 {
    debug_assert!(alpha >= 0.0);
    j_weight(gamma, u) * theta(gamma, u).powf(-alpha)
}
