// Negated float comparisons like `!(x >= 0.0)` are deliberate: they reject
// NaN along with out-of-domain values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! C ABI for the tailix tail-index estimators.
//!
//! The surface follows the usual handle-and-error-code pattern: an opaque
//! `TailixConfig` built by `tailix_config_new` and adjusted by setters, plus
//! flat functions for estimation, influence diagnostics and the asymptotic
//! variance. Every function returns a `TailixStatus`; outputs are written
//! through caller-provided pointers and are only meaningful on `Ok` (and, for
//! estimation, on `NonConvergence`, where the best scan point is reported).
//!
//! The generated header lands in `include/tailix.h` at build time.

use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use tailix::estimators::{estimate_from_sample, DpdConfig, EstimatorKind};
use tailix::robustness;
use tailix::Error;

/// Result codes for every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailixStatus {
    Ok = 0,
    /// Null pointer, non-finite argument, or parameter out of domain.
    InvalidArgument = 1,
    /// Tied top order statistics make the transform degenerate.
    Tie = 2,
    /// Not enough observations for the requested number of extremes.
    Size = 3,
    /// The threshold order statistic is not strictly positive.
    Positivity = 4,
    /// The minimizer hit its iteration cap; estimate outputs hold the best
    /// scan point.
    NonConvergence = 5,
    /// Numerical integration did not converge (divergent parameter corner).
    QuadratureFailure = 6,
    /// An internal panic was caught at the boundary.
    Panic = 7,
}

fn status_of(err: &Error) -> TailixStatus {
    match err {
        Error::InvalidParam(_) | Error::Config(_) => TailixStatus::InvalidArgument,
        Error::Tie(_) => TailixStatus::Tie,
        Error::Size { .. } => TailixStatus::Size,
        Error::Positivity(_) => TailixStatus::Positivity,
        Error::NonConvergence => TailixStatus::NonConvergence,
        Error::Quadrature(_) => TailixStatus::QuadratureFailure,
    }
}

/// Estimator selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailixEstimator {
    /// Mean of the top-k log excesses (positive tails only).
    Hill = 0,
    /// Maximum likelihood under the exponential regression model.
    Mb = 1,
    /// Minimum density power divergence under the same model.
    MdpdeEr = 2,
    /// Divergence fit of an exponential to the log excesses.
    MdpdeKl = 3,
}

impl From<TailixEstimator> for EstimatorKind {
    fn from(e: TailixEstimator) -> Self {
        match e {
            TailixEstimator::Hill => EstimatorKind::Hill,
            TailixEstimator::Mb => EstimatorKind::Mb,
            TailixEstimator::MdpdeEr => EstimatorKind::MdpdeEr,
            TailixEstimator::MdpdeKl => EstimatorKind::MdpdeKl,
        }
    }
}

/// One fit result.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct TailixEstimate {
    pub gamma_hat: f64,
    pub objective: f64,
    pub n_roots_found: usize,
    pub converged: bool,
    pub estimator: TailixEstimator,
}

/// Opaque tuning-parameter handle (alpha, k, search interval, scan size,
/// tolerance). Hidden from the header on purpose.
pub struct TailixConfig {
    inner: DpdConfig,
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tailix_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// New config with the defaults alpha = 0.3, k = 225, search interval
/// [-5, 5], 201 scan points, tolerance 1e-8. Free with `tailix_config_free`.
#[no_mangle]
pub extern "C" fn tailix_config_new() -> *mut TailixConfig {
    Box::into_raw(Box::new(TailixConfig {
        inner: DpdConfig::default(),
    }))
}

/// Release a config handle. A null pointer is a no-op.
///
/// # Safety
/// `cfg` must come from `tailix_config_new` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tailix_config_free(cfg: *mut TailixConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

unsafe fn config_mut<'a>(cfg: *mut TailixConfig) -> Option<&'a mut TailixConfig> {
    cfg.as_mut()
}

// cbindgen does not look through macros, so the setters are written out.
fn apply_config(c: &mut TailixConfig, edit: impl FnOnce(&mut DpdConfig)) -> TailixStatus {
    let mut candidate = c.inner.clone();
    edit(&mut candidate);
    match candidate.validate() {
        Ok(()) => {
            c.inner = candidate;
            TailixStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Set the divergence tuning parameter (alpha >= 0).
///
/// # Safety
/// `cfg` must be a live handle from `tailix_config_new`.
#[no_mangle]
pub unsafe extern "C" fn tailix_config_set_alpha(
    cfg: *mut TailixConfig,
    value: f64,
) -> TailixStatus {
    let Some(c) = config_mut(cfg) else {
        return TailixStatus::InvalidArgument;
    };
    apply_config(c, |d| d.alpha = value)
}

/// Set the number of extreme order statistics (k >= 2).
///
/// # Safety
/// `cfg` must be a live handle from `tailix_config_new`.
#[no_mangle]
pub unsafe extern "C" fn tailix_config_set_k(cfg: *mut TailixConfig, value: usize) -> TailixStatus {
    let Some(c) = config_mut(cfg) else {
        return TailixStatus::InvalidArgument;
    };
    apply_config(c, |d| d.k = value)
}

/// Set the number of coarse scan points (>= 3).
///
/// # Safety
/// `cfg` must be a live handle from `tailix_config_new`.
#[no_mangle]
pub unsafe extern "C" fn tailix_config_set_grid_points(
    cfg: *mut TailixConfig,
    value: usize,
) -> TailixStatus {
    let Some(c) = config_mut(cfg) else {
        return TailixStatus::InvalidArgument;
    };
    apply_config(c, |d| d.grid_points = value)
}

/// Set the refinement tolerance on gamma (> 0).
///
/// # Safety
/// `cfg` must be a live handle from `tailix_config_new`.
#[no_mangle]
pub unsafe extern "C" fn tailix_config_set_tol(cfg: *mut TailixConfig, value: f64) -> TailixStatus {
    let Some(c) = config_mut(cfg) else {
        return TailixStatus::InvalidArgument;
    };
    apply_config(c, |d| d.tol = value)
}

/// Set the gamma search interval (lo < hi).
///
/// # Safety
/// `cfg` must be a live handle from `tailix_config_new`.
#[no_mangle]
pub unsafe extern "C" fn tailix_config_set_search(
    cfg: *mut TailixConfig,
    lo: f64,
    hi: f64,
) -> TailixStatus {
    let Some(c) = config_mut(cfg) else {
        return TailixStatus::InvalidArgument;
    };
    apply_config(c, |d| {
        d.search_lo = lo;
        d.search_hi = hi;
    })
}

/// Estimate the tail index of `data[0..len]` with the chosen estimator.
/// On `NonConvergence` the output still holds the best scan point.
///
/// # Safety
/// `data` must point to `len` readable f64 values; `out` must be writable;
/// `cfg` must be a live handle (null means defaults).
#[no_mangle]
pub unsafe extern "C" fn tailix_estimate(
    data: *const f64,
    len: usize,
    estimator: TailixEstimator,
    cfg: *const TailixConfig,
    out: *mut TailixEstimate,
) -> TailixStatus {
    if data.is_null() || out.is_null() || len == 0 {
        return TailixStatus::InvalidArgument;
    }
    let sample = std::slice::from_raw_parts(data, len);
    let config = cfg.as_ref().map(|c| c.inner.clone()).unwrap_or_default();
    let result = catch_unwind(AssertUnwindSafe(|| {
        estimate_from_sample(sample, estimator.into(), &config)
    }));
    match result {
        Ok(Ok(fit)) => {
            out.write(TailixEstimate {
                gamma_hat: fit.gamma_hat,
                objective: fit.objective_at_solution,
                n_roots_found: fit.n_roots_found,
                converged: fit.converged,
                estimator,
            });
            if fit.converged {
                TailixStatus::Ok
            } else {
                TailixStatus::NonConvergence
            }
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => TailixStatus::Panic,
    }
}

/// Fixed-sample influence of contamination at `t0` in direction `j0`
/// (1 <= j0 <= k-1) for the divergence estimator.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tailix_influence_single(
    t0: f64,
    j0: usize,
    k: usize,
    gamma: f64,
    alpha: f64,
    out: *mut f64,
) -> TailixStatus {
    if out.is_null() || !(t0 >= 0.0) || !(alpha >= 0.0) || k < 2 || j0 < 1 || j0 > k - 1 {
        return TailixStatus::InvalidArgument;
    }
    match catch_unwind(|| robustness::if_single(t0, j0, k, gamma, alpha)) {
        Ok(v) => {
            out.write(v);
            TailixStatus::Ok
        }
        Err(_) => TailixStatus::Panic,
    }
}

/// Gross-error sensitivity (supremum of |influence| over the contamination
/// point); +infinity at alpha = 0.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tailix_gross_error_sensitivity(
    j0: usize,
    k: usize,
    gamma: f64,
    alpha: f64,
    out: *mut f64,
) -> TailixStatus {
    if out.is_null() || !(alpha >= 0.0) || k < 2 || j0 < 1 || j0 > k - 1 {
        return TailixStatus::InvalidArgument;
    }
    match catch_unwind(|| robustness::gross_error_sensitivity(j0, k, gamma, alpha)) {
        Ok(v) => {
            out.write(v);
            TailixStatus::Ok
        }
        Err(_) => TailixStatus::Panic,
    }
}

/// Asymptotic variance pieces of the scaled estimator: the curvature
/// functional `a`, the score variance `sigma2`, and `sigma2 / a^2`.
/// Fails with `QuadratureFailure` where the defining integrals diverge.
///
/// # Safety
/// The three output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn tailix_asymptotic_variance(
    gamma: f64,
    alpha: f64,
    out_a: *mut f64,
    out_sigma2: *mut f64,
    out_variance: *mut f64,
) -> TailixStatus {
    if out_a.is_null() || out_sigma2.is_null() || out_variance.is_null() || !(alpha >= 0.0) {
        return TailixStatus::InvalidArgument;
    }
    match catch_unwind(|| tailix::asymptotics::asymptotic_variance(gamma, alpha)) {
        Ok(Ok(v)) => {
            out_a.write(v.a);
            out_sigma2.write(v.sigma2);
            out_variance.write(v.variance);
            TailixStatus::Ok
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => TailixStatus::Panic,
    }
}
