//! The four tail-index estimators and the shared one-dimensional solver.
//!
//! * `hill` — mean of the top-k log excesses; Pareto-type tails only.
//! * `estimate_mb` — maximum likelihood under the exponential regression
//!   model for the scaled log-ratios; handles every tail type.
//! * `estimate_mdpde_er` — minimum density power divergence fit of the same
//!   model; `alpha` trades efficiency for outlier resistance and `alpha = 0`
//!   recovers the maximum likelihood fit.
//! * `estimate_kl` — the comparator that fits an exponential to the log
//!   excesses by the same divergence; defined for positive tail indices.
//!
//! The divergence objectives can have several stationary points, so every
//! fit runs a coarse grid scan first and refines the local minima it finds,
//! keeping the candidate with the smallest objective (ties break toward the
//! smallest |gamma|).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tail_transform::{
    j_weight_ln, log_excesses, scaled_log_ratios, theta_ln, LogExcesses, ScaledLogRatios,
};

/// Which estimator produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Hill,
    Mb,
    MdpdeEr,
    MdpdeKl,
}

impl EstimatorKind {
    /// Stable tag used in CSV output.
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Hill => "Hill",
            Self::Mb => "MB",
            Self::MdpdeEr => "MDPDE_ER",
            Self::MdpdeKl => "MDPDE_KL",
        }
    }

    pub const ALL: [EstimatorKind; 4] = [Self::Hill, Self::Mb, Self::MdpdeEr, Self::MdpdeKl];
}

impl std::fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.tag())
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hill" => Ok(Self::Hill),
            "mb" => Ok(Self::Mb),
            "mdpde_er" | "mdpde-er" | "er" => Ok(Self::MdpdeEr),
            "mdpde_kl" | "mdpde-kl" | "kl" => Ok(Self::MdpdeKl),
            other => Err(Error::Config(format!("unknown estimator: {other}"))),
        }
    }
}

/// Tuning parameters and solver settings for the divergence estimators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DpdConfig {
    /// Divergence tuning parameter, `alpha >= 0`. Zero is maximum likelihood.
    pub alpha: f64,
    /// Number of extreme order statistics entering the transform.
    pub k: usize,
    /// Lower end of the gamma search interval.
    pub search_lo: f64,
    /// Upper end of the gamma search interval.
    pub search_hi: f64,
    /// Points in the coarse scan; the scan must be global because the
    /// estimating equation can have several roots.
    pub grid_points: usize,
    /// Absolute tolerance on gamma for the local refinement.
    pub tol: f64,
}

/// Iteration cap for the bracketed refinement.
const REFINE_MAX_ITERS: usize = 200;

/// At most this many grid minima are refined per fit.
const MAX_CANDIDATES: usize = 8;

impl DpdConfig {
    /// Suggested default tuning: `alpha = 0.3`, `k = 225`.
    pub fn new(alpha: f64, k: usize) -> Self {
        Self {
            alpha,
            k,
            search_lo: -5.0,
            search_hi: 5.0,
            grid_points: 201,
            tol: 1e-8,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidParam(format!(
                "alpha must be >= 0, got {}",
                self.alpha
            )));
        }
        if self.k < 2 {
            return Err(Error::InvalidParam(format!(
                "k must be >= 2, got {}",
                self.k
            )));
        }
        if !(self.search_lo < self.search_hi) {
            return Err(Error::InvalidParam(format!(
                "search interval is empty: [{}, {}]",
                self.search_lo, self.search_hi
            )));
        }
        if self.grid_points < 3 {
            return Err(Error::InvalidParam(format!(
                "grid_points must be >= 3, got {}",
                self.grid_points
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParam(format!(
                "tol must be > 0, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

impl Default for DpdConfig {
    fn default() -> Self {
        Self::new(0.3, 225)
    }
}

/// Outcome of a single fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub gamma_hat: f64,
    pub objective_at_solution: f64,
    pub converged: bool,
    /// Sign changes of the estimating function across the scan grid.
    pub n_roots_found: usize,
    pub estimator: EstimatorKind,
}

/// Hill estimator: the mean of the top-k log excesses.
pub fn hill(sample: &[f64], k: usize) -> Result<EstimateResult> {
    let z = log_excesses(sample, k)?;
    Ok(hill_from_excesses(&z))
}

/// Hill estimate from an already computed transform.
pub fn hill_from_excesses(z: &LogExcesses) -> EstimateResult {
    let gamma_hat = mean(z.values());
    EstimateResult {
        gamma_hat,
        // the exponential negative mean log-likelihood at its minimizer
        objective_at_solution: gamma_hat.ln() + 1.0,
        converged: true,
        n_roots_found: 1,
        estimator: EstimatorKind::Hill,
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Precomputed `log(j / (k+1))` for the transform's index grid.
fn ln_u_grid(k: usize) -> Vec<f64> {
    let kp1 = (k + 1) as f64;
    (1..k).map(|j| (j as f64 / kp1).ln()).collect()
}

fn erm_objective_at(y: &[f64], ln_u: &[f64], gamma: f64, alpha: f64) -> f64 {
    let n = y.len() as f64;
    if alpha == 0.0 {
        // negative mean log-likelihood; the alpha -> 0 limit of the
        // divergence objective up to a constant that does not depend on gamma
        let mut s = 0.0;
        for (yj, &lu) in y.iter().zip(ln_u) {
            let th = theta_ln(gamma, lu);
            s += th.ln() + yj / th;
        }
        s / n
    } else {
        let c1 = 1.0 / (1.0 + alpha);
        let c2 = (1.0 + alpha) / alpha;
        let mut s = 0.0;
        for (yj, &lu) in y.iter().zip(ln_u) {
            let th = theta_ln(gamma, lu);
            let tp = (-alpha * th.ln()).exp(); // theta^(-alpha)
            s += tp * (c1 - c2 * (-alpha * yj / th).exp());
        }
        s / n
    }
}

fn erm_score_at(y: &[f64], ln_u: &[f64], gamma: f64, alpha: f64) -> f64 {
    let c = alpha / ((1.0 + alpha) * (1.0 + alpha));
    let mut s = 0.0;
    for (yj, &lu) in y.iter().zip(ln_u) {
        let th = theta_ln(gamma, lu);
        let jw = j_weight_ln(gamma, lu);
        let ja = jw * th.powf(-alpha);
        s += ja * (c * th + (yj - th) * (-alpha * yj / th).exp());
    }
    s
}

/// Objective and score in one pass; the scan stage calls this for every grid
/// point, and sharing the per-term transcendentals roughly halves its cost.
/// The objective arithmetic matches `erm_objective_at` operation for
/// operation, so scan values and refinement values are directly comparable.
fn erm_objective_and_score_at(y: &[f64], ln_u: &[f64], gamma: f64, alpha: f64) -> (f64, f64) {
    let n = y.len() as f64;
    if alpha == 0.0 {
        let mut obj = 0.0;
        let mut score = 0.0;
        for (yj, &lu) in y.iter().zip(ln_u) {
            let th = theta_ln(gamma, lu);
            obj += th.ln() + yj / th;
            score += j_weight_ln(gamma, lu) * (yj - th);
        }
        return (obj / n, score);
    }
    let c1 = 1.0 / (1.0 + alpha);
    let c2 = (1.0 + alpha) / alpha;
    let c = alpha / ((1.0 + alpha) * (1.0 + alpha));
    let mut obj = 0.0;
    let mut score = 0.0;
    for (yj, &lu) in y.iter().zip(ln_u) {
        let th = theta_ln(gamma, lu);
        let tp = (-alpha * th.ln()).exp(); // theta^(-alpha)
        let damp = (-alpha * yj / th).exp();
        obj += tp * (c1 - c2 * damp);
        score += j_weight_ln(gamma, lu) * tp * (c * th + (yj - th) * damp);
    }
    (obj / n, score)
}

/// Divergence objective `H_k(gamma)` averaged over the transformed sample.
///
/// For `alpha = 0` this is the negative mean log-likelihood, which has the
/// same minimizers as the `alpha -> 0` limit of the divergence.
pub fn mdpde_objective(y: &ScaledLogRatios, gamma: f64, alpha: f64) -> f64 {
    assert!(alpha >= 0.0, "alpha must be nonnegative");
    erm_objective_at(y.values(), &ln_u_grid(y.k()), gamma, alpha)
}

/// The estimating function whose roots are the stationary points of the
/// objective:
///
/// ```text
/// sum_j Ja(j/(k+1)) * [ alpha*theta_j/(1+alpha)^2 + (Y_j - theta_j) exp(-alpha Y_j / theta_j) ]
/// ```
///
/// At `alpha = 0` every factor collapses and this is exactly the maximum
/// likelihood estimating function `sum_j J(j/(k+1)) (Y_j - theta_j)`.
pub fn mdpde_estimating_fn(y: &ScaledLogRatios, gamma: f64, alpha: f64) -> f64 {
    assert!(alpha >= 0.0, "alpha must be nonnegative");
    erm_score_at(y.values(), &ln_u_grid(y.k()), gamma, alpha)
}

struct ScanResult {
    gamma_hat: f64,
    objective: f64,
    converged: bool,
    n_roots: usize,
}

/// Golden-section minimization on a bracket.
fn golden_min(
    f: &mut impl FnMut(f64) -> f64,
    mut a: f64,
    mut b: f64,
    tol: f64,
    max_iter: usize,
) -> (f64, f64, bool) {
    const R: f64 = 0.618_033_988_749_894_9;
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while b - a > tol {
        if iters >= max_iter {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - R * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + R * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    let (x, fx) = if fc <= fd { (c, fc) } else { (d, fd) };
    (x, fx, b - a <= tol)
}

/// Bisect the score to a sign change near `x`; sharpens the minimizer well
/// below the floor that objective comparisons alone can resolve.
fn polish_stationary_point(
    score: &mut dyn FnMut(f64) -> f64,
    x: f64,
    start_width: f64,
    lo: f64,
    hi: f64,
) -> Option<f64> {
    let mut w = start_width.max(1e-12);
    for _ in 0..6 {
        let mut a = (x - w).max(lo);
        let mut b = (x + w).min(hi);
        if a >= b {
            return None;
        }
        let mut sa = score(a);
        let sb = score(b);
        if sa == 0.0 {
            return Some(a);
        }
        if sb == 0.0 {
            return Some(b);
        }
        if sa * sb < 0.0 {
            for _ in 0..120 {
                let m = 0.5 * (a + b);
                let sm = score(m);
                if sm == 0.0 || b - a < 1e-15 * (1.0 + m.abs()) {
                    return Some(m);
                }
                if sa * sm < 0.0 {
                    b = m;
                } else {
                    a = m;
                    sa = sm;
                }
            }
            return Some(0.5 * (a + b));
        }
        w *= 4.0;
    }
    None
}

fn count_sign_changes(vals: &[f64]) -> usize {
    let mut count = 0;
    let mut prev: Option<f64> = None;
    for &v in vals {
        if v == 0.0 {
            count += 1;
            prev = None;
            continue;
        }
        if let Some(p) = prev {
            if p * v < 0.0 {
                count += 1;
            }
        }
        prev = Some(v);
    }
    count
}

/// Local refinement of the minima of a completed grid scan. The grid may be
/// non-uniform (the comparator uses a geometric one).
fn scan_and_refine(
    obj: &mut impl FnMut(f64) -> f64,
    mut score: Option<&mut dyn FnMut(f64) -> f64>,
    grid: &[f64],
    values: &[f64],
    score_values: Option<&[f64]>,
    tol: f64,
) -> ScanResult {
    debug_assert!(grid.len() >= 3 && grid.len() == values.len());
    let n_roots = match score_values {
        Some(sv) => count_sign_changes(sv),
        None => {
            // local minima of the scan as a proxy for root count
            (0..grid.len())
                .filter(|&i| {
                    (i == 0 || values[i] <= values[i - 1])
                        && (i + 1 == grid.len() || values[i] <= values[i + 1])
                })
                .count()
        }
    };

    let mut minima: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            (i == 0 || values[i] <= values[i - 1])
                && (i + 1 == grid.len() || values[i] <= values[i + 1])
        })
        .collect();
    minima.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    minima.truncate(MAX_CANDIDATES);

    let lo = grid[0];
    let hi = grid[grid.len() - 1];
    let mut best: Option<(f64, f64, bool)> = None;
    for &i in &minima {
        let a = if i == 0 { grid[0] } else { grid[i - 1] };
        let b = if i + 1 == grid.len() {
            grid[grid.len() - 1]
        } else {
            grid[i + 1]
        };
        let (mut x, mut fx, conv) = golden_min(obj, a, b, tol, REFINE_MAX_ITERS);
        if let Some(s) = score.as_deref_mut() {
            if let Some(xp) = polish_stationary_point(s, x, 16.0 * tol, lo, hi) {
                let fxp = obj(xp);
                if fxp <= fx + 1e-12 * (1.0 + fx.abs()) {
                    x = xp;
                    fx = fxp;
                }
            }
        }
        let better = match best {
            None => true,
            Some((bx, bfx, _)) => {
                if close(fx, bfx) {
                    x.abs() < bx.abs()
                } else {
                    fx < bfx
                }
            }
        };
        if better {
            best = Some((x, fx, conv));
        }
    }

    // grid minima always exist, but fall back to the best raw grid point
    let (gamma_hat, objective, converged) = best.unwrap_or_else(|| {
        let i = (0..grid.len())
            .min_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap())
            .unwrap();
        (grid[i], values[i], false)
    });
    ScanResult {
        gamma_hat,
        objective,
        converged,
        n_roots,
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

fn uniform_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    let step = (hi - lo) / (m - 1) as f64;
    (0..m).map(|i| lo + i as f64 * step).collect()
}

/// Minimum density power divergence estimate of the tail index under the
/// exponential regression model.
pub fn estimate_mdpde_er(y: &ScaledLogRatios, cfg: &DpdConfig) -> Result<EstimateResult> {
    estimate_erm_tagged(y, cfg, cfg.alpha, EstimatorKind::MdpdeEr)
}

/// Maximum likelihood estimate under the exponential regression model
/// (the `alpha = 0` member of the divergence family).
pub fn estimate_mb(y: &ScaledLogRatios, cfg: &DpdConfig) -> Result<EstimateResult> {
    estimate_erm_tagged(y, cfg, 0.0, EstimatorKind::Mb)
}

fn estimate_erm_tagged(
    y: &ScaledLogRatios,
    cfg: &DpdConfig,
    alpha: f64,
    tag: EstimatorKind,
) -> Result<EstimateResult> {
    cfg.validate()?;
    if cfg.k != y.k() {
        return Err(Error::InvalidParam(format!(
            "config k = {} does not match transform k = {}",
            cfg.k,
            y.k()
        )));
    }
    let ln_u = ln_u_grid(y.k());
    let ys = y.values();
    let mut obj = |g: f64| erm_objective_at(ys, &ln_u, g, alpha);
    let mut score = |g: f64| erm_score_at(ys, &ln_u, g, alpha);
    let grid = uniform_grid(cfg.search_lo, cfg.search_hi, cfg.grid_points);
    let mut values = Vec::with_capacity(grid.len());
    let mut score_values = Vec::with_capacity(grid.len());
    for &g in &grid {
        let (v, s) = erm_objective_and_score_at(ys, &ln_u, g, alpha);
        values.push(v);
        score_values.push(s);
    }
    let scan = scan_and_refine(
        &mut obj,
        Some(&mut score),
        &grid,
        &values,
        Some(&score_values),
        cfg.tol,
    );
    Ok(EstimateResult {
        gamma_hat: scan.gamma_hat,
        objective_at_solution: scan.objective,
        converged: scan.converged,
        n_roots_found: scan.n_roots,
        estimator: tag,
    })
}

fn kl_objective_at(z: &[f64], gamma: f64, alpha: f64) -> f64 {
    let n = z.len() as f64;
    let gp = gamma.powf(-alpha);
    let mean_damp = z.iter().map(|&zj| (-alpha * zj / gamma).exp()).sum::<f64>() / n;
    gp * (1.0 / (1.0 + alpha) - (1.0 + alpha) / alpha * mean_damp)
}

/// Comparator estimate: fit an exponential with mean `gamma` to the log
/// excesses by minimum density power divergence. Only meaningful for
/// positive tail indices; the search runs over `(0, search_hi]`. At
/// `alpha = 0` this is the exponential maximum likelihood fit, i.e. the
/// Hill estimate.
pub fn estimate_kl(z: &LogExcesses, cfg: &DpdConfig) -> Result<EstimateResult> {
    cfg.validate()?;
    if cfg.k != z.k() {
        return Err(Error::InvalidParam(format!(
            "config k = {} does not match transform k = {}",
            cfg.k,
            z.k()
        )));
    }
    if z.values().iter().any(|&v| v <= 0.0) {
        return Err(Error::Positivity(0.0));
    }
    if cfg.alpha == 0.0 {
        let gamma_hat = mean(z.values());
        return Ok(EstimateResult {
            gamma_hat,
            objective_at_solution: gamma_hat.ln() + 1.0,
            converged: true,
            n_roots_found: 1,
            estimator: EstimatorKind::MdpdeKl,
        });
    }
    if !(cfg.search_hi > 0.0) {
        return Err(Error::InvalidParam(
            "search_hi must be positive for the comparator estimator".into(),
        ));
    }
    // geometric grid over (0, search_hi]
    let hi = cfg.search_hi;
    let m = cfg.grid_points;
    let lo_frac: f64 = 1e-6;
    let grid: Vec<f64> = (0..m)
        .map(|i| hi * lo_frac.powf(1.0 - i as f64 / (m - 1) as f64))
        .collect();
    let zs = z.values();
    let alpha = cfg.alpha;
    let mut obj = |g: f64| kl_objective_at(zs, g, alpha);
    let values: Vec<f64> = grid.iter().map(|&g| obj(g)).collect();
    let scan = scan_and_refine(&mut obj, None, &grid, &values, None, cfg.tol);
    Ok(EstimateResult {
        gamma_hat: scan.gamma_hat,
        objective_at_solution: scan.objective,
        converged: scan.converged,
        n_roots_found: scan.n_roots,
        estimator: EstimatorKind::MdpdeKl,
    })
}

/// Run any of the estimators directly on a raw sample, transforming as
/// needed with the config's `k`.
pub fn estimate_from_sample(
    sample: &[f64],
    kind: EstimatorKind,
    cfg: &DpdConfig,
) -> Result<EstimateResult> {
    match kind {
        EstimatorKind::Hill => hill(sample, cfg.k),
        EstimatorKind::Mb => {
            let y = scaled_log_ratios(sample, cfg.k)?;
            estimate_mb(&y, cfg)
        }
        EstimatorKind::MdpdeEr => {
            let y = scaled_log_ratios(sample, cfg.k)?;
            estimate_mdpde_er(&y, cfg)
        }
        EstimatorKind::MdpdeKl => {
            let z = log_excesses(sample, cfg.k)?;
            estimate_kl(&z, cfg)
        }
    }
}

/// Exact exponential-regression means `theta_j(gamma)` for `j = 1..k-1`;
/// noiseless fixture data for tests and oracles.
pub fn exact_erm_means(gamma: f64, k: usize) -> Vec<f64> {
    let kp1 = (k + 1) as f64;
    (1..k)
        .map(|j| crate::tail_transform::theta(gamma, j as f64 / kp1))
        .collect()
}
