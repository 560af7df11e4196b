//! Large-sample variance functionals for the divergence estimator and the
//! adaptive quadrature they share.
//!
//! The limit of `sqrt(k-1) * (gamma_hat - gamma)` is normal with variance
//! `sigma2 / a^2`, where
//!
//! ```text
//! a      = (1+alpha^2)/(1+alpha)^3            * I[ J(u)^2 theta(u)^(2-alpha)  ]
//! sigma2 = ((1+4a^2)/(1+2a)^3 - a^2/(1+a)^4)  * I[ J(u)^2 theta(u)^(2-2alpha) ]
//! ```
//!
//! with `I[.]` the integral over u in (0,1). Writing the integrands through
//! `J` and `theta` keeps every base positive for negative tail indices,
//! where the expanded `(1-u^gamma)^(alpha-2)` form would be complex-valued;
//! for positive tail indices the two forms are algebraically identical.
//!
//! For strongly negative tail indices the integrands blow up at u = 0 like
//! `u^(-gamma*alpha)` (twice that exponent for `sigma2`); the integrals exist
//! only while those exponents stay above -1, and the quadrature reports
//! failure rather than a number when they do not.

use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::tail_transform::{
    j_weight, j_weight_ln, ln_from_parts, theta, theta_ln, GAMMA_BRANCH_EPS,
};

/// Controls for the adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Relative self-convergence tolerance.
    pub rtol: f64,
    /// Maximum bisection depth per panel before giving up.
    pub max_depth: usize,
    /// Minimum bisection depth; raise it to cross-check stability under
    /// forced panel refinement.
    pub min_depth: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            max_depth: 44,
            min_depth: 2,
        }
    }
}

/// Truncation of the left substitution `u = exp(-v)`; `exp(-700)` is close
/// to the smallest normal f64.
const V_MAX: f64 = 700.0;

/// Truncation of the right substitution `1 - u = exp(-w)`. The distance to 1
/// is carried exactly, so it can go far below the f64 spacing at 1.
const W_MAX: f64 = 150.0;

const LN_2: f64 = std::f64::consts::LN_2;

/// Initial panel edges for the left half, graded toward the interior.
const LEFT_MESH: [f64; 11] = [
    LN_2, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0, V_MAX,
];

/// Initial panel edges for the right half.
const RIGHT_MESH: [f64; 9] = [LN_2, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, W_MAX];

/// Cap on refined panels per integral; a bound on runaway subdivision when
/// an integrand is too rough to ever meet tolerance.
const PANEL_BUDGET: usize = 60_000;

fn gl16_nodes() -> &'static [(f64, f64)] {
    static NODES: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    NODES.get_or_init(|| legendre_nodes(16))
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// three-term recurrence.
fn legendre_nodes(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let mut x = (std::f64::consts::PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_p(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_p(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out
}

fn legendre_p(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for m in 2..=n {
        let m = m as f64;
        let p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gl16(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    gl16_nodes()
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

#[allow(clippy::too_many_arguments)]
fn adapt(
    g: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    opts: &QuadratureOptions,
    budget: &mut usize,
) -> (f64, bool) {
    let m = 0.5 * (a + b);
    let left = gl16(g, a, m);
    let right = gl16(g, m, b);
    let two = left + right;
    if !two.is_finite() {
        return (two, false);
    }
    let err = (two - whole).abs();
    if depth >= opts.min_depth && err <= tol {
        return (two, true);
    }
    if depth >= opts.max_depth || *budget < 2 {
        return (two, err <= tol);
    }
    *budget -= 2;
    let (sl, okl) = adapt(g, a, m, left, 0.5 * tol, depth + 1, opts, budget);
    let (sr, okr) = adapt(g, m, b, right, 0.5 * tol, depth + 1, opts, budget);
    (sl + sr, okl && okr)
}

struct HalfResult {
    value: f64,
    tail: f64,
    converged: bool,
}

fn integrate_mesh(
    g: &impl Fn(f64) -> f64,
    mesh: &[f64],
    tail_from: f64,
    tol_each: f64,
    opts: &QuadratureOptions,
    budget: &mut usize,
) -> HalfResult {
    let mut value = 0.0;
    let mut tail = 0.0;
    let mut converged = true;
    for w in mesh.windows(2) {
        let whole = gl16(g, w[0], w[1]);
        let (s, ok) = adapt(g, w[0], w[1], whole, tol_each, 0, opts, budget);
        value += s;
        if w[0] >= tail_from {
            tail = s;
        }
        converged &= ok;
    }
    HalfResult {
        value,
        tail,
        converged,
    }
}

/// Integrate `f(u, 1-u)` over the open interval (0, 1), never evaluating at
/// the endpoints. The integrand receives both `u` and `1 - u` so it can keep
/// full precision at whichever endpoint it cares about; near 1 the distance
/// argument is exact far below the f64 spacing of points around 1.
///
/// The two halves are substituted as `u = exp(-v)` and `1 - u = exp(-w)`,
/// which turns algebraic endpoint blowup into smooth exponential decay that
/// the graded panels resolve quickly.
///
/// Fails with [`Error::Quadrature`] when panel refinement cannot reach the
/// tolerance or when the integrand's mass has not decayed across the deepest
/// panels (`u ~ 1e-112` on the left, `1 - u ~ 1e-28` on the right), the
/// signature of a divergent or hopelessly slowly converging integral.
pub fn integrate_open01(f: impl Fn(f64, f64) -> f64, opts: &QuadratureOptions) -> Result<f64> {
    let left = |v: f64| {
        let u = (-v).exp();
        f(u, 1.0 - u) * u
    };
    let right = |w: f64| {
        let d = (-w).exp();
        f(1.0 - d, d) * d
    };
    let coarse_l: f64 = LEFT_MESH.windows(2).map(|w| gl16(&left, w[0], w[1])).sum();
    let coarse_r: f64 = RIGHT_MESH
        .windows(2)
        .map(|w| gl16(&right, w[0], w[1]))
        .sum();
    let coarse = coarse_l + coarse_r;
    if !coarse.is_finite() {
        return Err(Error::Quadrature(
            "integrand is not finite on the coarse mesh".into(),
        ));
    }
    let mut scale = coarse.abs().max(1e-12);
    for attempt in 0..3 {
        let tol_each = opts.rtol * scale / (LEFT_MESH.len() + RIGHT_MESH.len()) as f64;
        let mut budget = PANEL_BUDGET;
        let l = integrate_mesh(&left, &LEFT_MESH, 256.0, tol_each, opts, &mut budget);
        let r = integrate_mesh(&right, &RIGHT_MESH, 64.0, tol_each, opts, &mut budget);
        let total = l.value + r.value;
        if !(l.converged && r.converged) || !total.is_finite() {
            return Err(Error::Quadrature(
                "panel refinement failed to converge".into(),
            ));
        }
        if l.tail.abs() > 1e-5 * total.abs() + 1e-280 || r.tail.abs() > 1e-5 * total.abs() + 1e-280
        {
            return Err(Error::Quadrature(
                "integrand mass has not decayed at the deep endpoint panels; the integral is divergent or nearly so".into(),
            ));
        }
        // if the coarse pass misjudged the magnitude, redo with a tolerance
        // scaled to the refined value
        if attempt < 2 && total != 0.0 && (total.abs() > 10.0 * scale || total.abs() < 0.1 * scale)
        {
            scale = total.abs();
            continue;
        }
        return Ok(total);
    }
    unreachable!("the final attempt always returns");
}

/// Information-side integrand `J(u)^2 theta(u)^(2-alpha)`, written so that
/// every power has a positive base and nothing overflows for `gamma < 0`
/// deep into the left tail.
fn info_integrand(gamma: f64, alpha: f64, u: f64, one_minus_u: f64) -> f64 {
    let lu = ln_from_parts(u, one_minus_u);
    if gamma < -GAMMA_BRANCH_EPS {
        let neg = (-gamma * lu).exp_m1(); // u^{-gamma} - 1, in (-1, 0)
        let core = -neg - gamma * lu;
        let apow = (gamma * alpha * lu).exp(); // u^{gamma*alpha}
        ((-gamma).powf(2.0 - alpha) / gamma.powi(4)) * apow * core * core * (-neg).powf(alpha - 2.0)
    } else {
        let jw = j_weight_ln(gamma, lu);
        let th = theta_ln(gamma, lu);
        jw * jw * th.powf(2.0 - alpha)
    }
}

/// Variance-side integrand `J(u)^2 theta(u)^(2-2alpha)`.
fn variance_integrand(gamma: f64, alpha: f64, u: f64, one_minus_u: f64) -> f64 {
    let lu = ln_from_parts(u, one_minus_u);
    if gamma < -GAMMA_BRANCH_EPS {
        let neg = (-gamma * lu).exp_m1();
        let core = -neg - gamma * lu;
        let apow = (2.0 * gamma * alpha * lu).exp();
        ((-gamma).powf(2.0 - 2.0 * alpha) / gamma.powi(4))
            * apow
            * core
            * core
            * (-neg).powf(2.0 * alpha - 2.0)
    } else {
        let jw = j_weight_ln(gamma, lu);
        let th = theta_ln(gamma, lu);
        jw * jw * th.powf(2.0 - 2.0 * alpha)
    }
}

fn a_coefficient(alpha: f64) -> f64 {
    (1.0 + alpha * alpha) / (1.0 + alpha).powi(3)
}

fn sigma_coefficient(alpha: f64) -> f64 {
    (1.0 + 4.0 * alpha * alpha) / (1.0 + 2.0 * alpha).powi(3)
        - alpha * alpha / (1.0 + alpha).powi(4)
}

/// Plain information integral `I[ J^2 theta^(2-alpha) ]` without the leading
/// coefficient; shared with the influence-function limits.
pub(crate) fn information_integral(gamma: f64, alpha: f64) -> Result<f64> {
    integrate_open01(
        |u, omu| info_integrand(gamma, alpha, u, omu),
        &QuadratureOptions::default(),
    )
}

/// The curvature functional `a` of the estimating equation.
pub fn a_gamma(gamma: f64, alpha: f64) -> Result<f64> {
    a_gamma_with(gamma, alpha, &QuadratureOptions::default())
}

pub fn a_gamma_with(gamma: f64, alpha: f64, opts: &QuadratureOptions) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(a_coefficient(alpha)
        * integrate_open01(|u, omu| info_integrand(gamma, alpha, u, omu), opts)?)
}

/// The score-variance functional `sigma^2`.
pub fn sigma2_gamma(gamma: f64, alpha: f64) -> Result<f64> {
    sigma2_gamma_with(gamma, alpha, &QuadratureOptions::default())
}

pub fn sigma2_gamma_with(gamma: f64, alpha: f64, opts: &QuadratureOptions) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(sigma_coefficient(alpha)
        * integrate_open01(|u, omu| variance_integrand(gamma, alpha, u, omu), opts)?)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!(
            "alpha must be >= 0, got {alpha}"
        )))
    }
}

/// The assembled limit variance of `sqrt(k-1) * (gamma_hat - gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticVariance {
    pub gamma: f64,
    pub alpha: f64,
    pub a: f64,
    pub sigma2: f64,
    /// `sigma2 / a^2`
    pub variance: f64,
}

pub fn asymptotic_variance(gamma: f64, alpha: f64) -> Result<AsymptoticVariance> {
    let a = a_gamma(gamma, alpha)?;
    let sigma2 = sigma2_gamma(gamma, alpha)?;
    Ok(AsymptoticVariance {
        gamma,
        alpha,
        a,
        sigma2,
        variance: sigma2 / (a * a),
    })
}

/// Finite-k Riemann analogue of `sigma2`; converges to it as k grows.
pub fn omega_k(gamma: f64, alpha: f64, k: usize) -> f64 {
    assert!(k >= 2, "k must be >= 2");
    let kp1 = (k + 1) as f64;
    let sum: f64 = (1..k)
        .map(|j| {
            let u = j as f64 / kp1;
            let jw = j_weight(gamma, u);
            let th = theta(gamma, u);
            jw * jw * th.powf(2.0 - 2.0 * alpha)
        })
        .sum();
    sigma_coefficient(alpha) * sum / (k - 1) as f64
}

/// Finite-k Riemann analogue of `a`; converges to it as k grows.
pub fn psi_k(gamma: f64, alpha: f64, k: usize) -> f64 {
    assert!(k >= 2, "k must be >= 2");
    let kp1 = (k + 1) as f64;
    let sum: f64 = (1..k)
        .map(|j| {
            let u = j as f64 / kp1;
            let jw = j_weight(gamma, u);
            let th = theta(gamma, u);
            jw * jw * th.powf(2.0 - alpha)
        })
        .sum();
    a_coefficient(alpha) * sum / (k - 1) as f64
}
