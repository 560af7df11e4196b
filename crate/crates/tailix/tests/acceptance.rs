//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Criterion 8's small-t plateau clause is known-red; the comment on that
//! test works through the math.

use rand::Rng;
use tailix::asymptotics::asymptotic_variance;
use tailix::distributions::{ks_statistic, DistributionSpec, MixtureSpec};
use tailix::estimators::{
    estimate_mb, estimate_mdpde_er, exact_erm_means, mdpde_estimating_fn, mdpde_objective,
    DpdConfig, EstimatorKind,
};
use tailix::rng::{replication_stream, stream, StreamRng};
use tailix::robustness::{
    asymptotic_if_all, gross_error_sensitivity, if_single, if_single_limit, PsiFamily,
};
use tailix::sim::{run_erm_oracle, run_scenario, Scenario};
use tailix::tail_transform::{scaled_log_ratios, theta, ScaledLogRatios};

fn report(id: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {id:>2} {name}: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
}

fn exp_draw(theta: f64, rng: &mut StreamRng) -> f64 {
    let u: f64 = loop {
        let v = rng.gen::<f64>();
        if v > 0.0 {
            break v;
        }
    };
    -theta * u.ln()
}

fn erm_draws(gamma: f64, k: usize, rng: &mut StreamRng) -> ScaledLogRatios {
    let kp1 = (k + 1) as f64;
    let w: Vec<f64> = (1..k)
        .map(|j| exp_draw(theta(gamma, j as f64 / kp1), rng))
        .collect();
    ScaledLogRatios::from_parts(w, k).unwrap()
}

/// Criterion 1: At alpha = 0 the estimating function must coincide with the maximum
/// likelihood estimating function, written out independently.
#[test]
fn criterion_01_estimating_equation_reduction() {
    let mut rng = stream(101);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let k = 20 + (i * 7) % 180;
        let g_data: f64 = rng.gen_range(0.05..1.5) * if i % 2 == 0 { 1.0 } else { -1.0 };
        let y = erm_draws(g_data, k, &mut rng);
        let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let g_eval: f64 = sign * rng.gen_range(0.05..2.0);
        // independent evaluation of the likelihood estimating function
        let kp1 = (k + 1) as f64;
        let mut oracle = 0.0;
        for (j, yj) in y.values().iter().enumerate() {
            let u = (j + 1) as f64 / kp1;
            let ug = u.powf(g_eval);
            let jw = (ug - 1.0 - g_eval * ug * u.ln()) / (g_eval * g_eval);
            oracle += jw * (yj - g_eval / (1.0 - ug));
        }
        worst = worst.max((mdpde_estimating_fn(&y, g_eval, 0.0) - oracle).abs());
    }
    let pass = worst < 1e-10;
    report(
        1,
        "estimating-equation reduction at alpha=0",
        pass,
        &format!("max abs dev {worst:.3e}"),
    );
    assert!(pass);
}

/// Criterion 2: Noiseless fixture: data equal to the model means must return the
/// generating gamma to 1e-6.
#[test]
fn criterion_02_noiseless_fixture() {
    let k = 101;
    let mut worst = 0.0f64;
    for &g0 in &[-1.0, -0.5, 0.0, 0.5, 1.0] {
        let y = ScaledLogRatios::from_parts(exact_erm_means(g0, k), k).unwrap();
        let fit = estimate_mb(&y, &DpdConfig::new(0.0, k)).unwrap();
        assert!(fit.converged);
        worst = worst.max((fit.gamma_hat - g0).abs());
    }
    let pass = worst < 1e-6;
    report(
        2,
        "noiseless fixture recovers gamma",
        pass,
        &format!("max abs error {worst:.3e}"),
    );
    assert!(pass);
}

/// Criterion 3: The solver must agree with a 1e5-point brute-force grid argmin of the
/// objective to 1e-4 on 150 seeded inputs.
#[test]
fn criterion_03_solver_matches_brute_force() {
    let gammas = [-1.0, 0.0, 1.0];
    let alphas = [0.0, 0.3, 1.0];
    let mut worst = 0.0f64;
    for i in 0..150 {
        let g0 = gammas[i % 3];
        let alpha = alphas[(i / 3) % 3];
        let mut rng = stream(3000 + i as u64);
        let k = 30 + (i * 5) % 50;
        let y = erm_draws(g0, k, &mut rng);
        let cfg = DpdConfig::new(alpha, k);
        let fit = estimate_mdpde_er(&y, &cfg).unwrap();
        let m = 100_000;
        let step = (cfg.search_hi - cfg.search_lo) / (m - 1) as f64;
        let mut best = (f64::INFINITY, f64::NAN);
        for j in 0..m {
            let g = cfg.search_lo + j as f64 * step;
            let v = mdpde_objective(&y, g, alpha);
            if v < best.0 {
                best = (v, g);
            }
        }
        worst = worst.max((fit.gamma_hat - best.1).abs());
    }
    let pass = worst < 1e-4;
    report(
        3,
        "solver equals brute-force grid argmin",
        pass,
        &format!("max abs dev {worst:.3e}"),
    );
    assert!(pass);
}

/// Criterion 4: Fisher consistency at desk scale: on exact exponential-regression data
/// the mean estimate must sit within 3 standard errors of the truth.
///
/// Known red at (gamma, alpha) = (-1, 0.5) and (-1, 1): those corners sit on
/// or past the boundary 2|gamma|alpha >= 1 where the limit variance stops
/// existing, and the estimator carries a genuine finite-sample bias there
/// (about -7e-3 and -2e-2 at k = 500, confirmed at 4000 replications and
/// shrinking like k^(-2/3)), which 2000 replications resolve at more than 3
/// standard errors. Everywhere else the bound holds.
#[test]
fn criterion_04_fisher_consistency() {
    let mut worst_ratio = 0.0f64;
    let mut detail = String::new();
    let mut failing = Vec::new();
    let mut off_boundary_pass = true;
    for (gi, &g0) in [-1.0, 0.0, 0.5, 1.0].iter().enumerate() {
        for &alpha in &[0.0, 0.3, 0.5, 1.0] {
            let run = run_erm_oracle(g0, 500, alpha, 2000, 74_000 + gi as u64).unwrap();
            let n = run.summary.n_converged as f64;
            let var =
                (run.summary.mse - run.summary.bias * run.summary.bias).max(0.0) * n / (n - 1.0);
            let se = (var / n).sqrt();
            let ratio = run.summary.bias.abs() / se;
            if ratio >= 3.0 {
                failing.push(format!("(gamma {g0}, alpha {alpha}): |bias|/SE {ratio:.2}"));
            }
            let on_boundary = g0 < 0.0 && 2.0 * g0.abs() * alpha >= 1.0;
            if !on_boundary {
                off_boundary_pass &= ratio < 3.0;
            }
            if ratio > worst_ratio {
                worst_ratio = ratio;
                detail = format!(
                    "worst |bias|/SE {ratio:.2} at gamma={g0}, alpha={alpha} (bias {:+.2e}, SE {:.2e})",
                    run.summary.bias, se
                );
            }
        }
    }
    let pass = worst_ratio < 3.0;
    report(
        4,
        "Fisher consistency on exact model data",
        pass,
        &format!(
            "{detail}; known red where the limit variance stops existing: [{}]",
            failing.join(", ")
        ),
    );
    assert!(
        off_boundary_pass,
        "bias detected away from the variance-existence boundary"
    );
    assert!(
        pass,
        "documented finite-sample bias at the variance-existence boundary: {failing:?}"
    );
}

/// Criterion 5: The empirical variance of sqrt(k-1)(gamma_hat - gamma) at k = 2000
/// must match the limit variance within 15%.
///
/// Known red at (-1, 0.3): the variance integrand has a u^(-0.6) (log u)^2
/// endpoint singularity there, so the finite-k variance approaches its limit
/// only like k^(-0.4) (log k)^2 and still sits ~30% low at k = 2000 (7% low
/// even at k = 2e6). The companion assertion checks the sharper statement
/// that the empirical variance matches the finite-k prediction
/// Omega_k / Psi_k^2 within 5% for every combination, which validates both
/// the sampler and the variance machinery.
#[test]
fn criterion_05_limit_variance() {
    use tailix::asymptotics::{omega_k, psi_k};
    let mut detail = String::new();
    let mut pass = true;
    let mut finite_k_pass = true;
    for &(g, alpha) in &[(1.0, 0.0), (1.0, 0.5), (-1.0, 0.3)] {
        let run = run_erm_oracle(g, 2000, alpha, 2000, 555).unwrap();
        let limit = asymptotic_variance(g, alpha).unwrap().variance;
        let rel = (run.scaled_variance - limit).abs() / limit;
        let predicted = omega_k(g, alpha, 2000) / psi_k(g, alpha, 2000).powi(2);
        let rel_fk = (run.scaled_variance - predicted).abs() / predicted;
        detail.push_str(&format!(
            "(gamma {g}, alpha {alpha}): empirical {:.4}, limit {limit:.4} (rel {rel:.3}), finite-k prediction {predicted:.4} (rel {rel_fk:.3}); ",
            run.scaled_variance
        ));
        pass &= rel < 0.15;
        finite_k_pass &= rel_fk < 0.05;
    }
    report(
        5,
        "limit variance of the scaled estimator",
        pass,
        detail.trim_end(),
    );
    assert!(
        finite_k_pass,
        "empirical variance disagrees with the finite-k prediction: {detail}"
    );
    assert!(
        pass,
        "documented slow limit approach at the singular corner: {detail}"
    );
}

/// Criterion 6: Influence boundedness dichotomy: for alpha > 0 the supremum over the
/// contamination grid is finite and equals the analytic candidate maximum;
/// at alpha = 0 the grid supremum doubles with the grid end.
#[test]
fn criterion_06_influence_boundedness_dichotomy() {
    let (k, j0) = (100, 50);
    let mut worst_rel = 0.0f64;
    let mut pass = true;
    for &g in &[-1.0, 0.0, 1.0] {
        for &alpha in &[0.3, 0.5, 1.0] {
            let sup = gross_error_sensitivity(j0, k, g, alpha);
            pass &= sup.is_finite();
            let th0 = theta(g, j0 as f64 / (k + 1) as f64);
            let t_star = th0 * (1.0 + alpha) / alpha;
            let cand = if_single(0.0, j0, k, g, alpha)
                .abs()
                .max(if_single(t_star, j0, k, g, alpha).abs())
                .max(if_single_limit(j0, k, g, alpha).abs());
            let rel = (sup - cand).abs() / cand;
            worst_rel = worst_rel.max(rel);
            pass &= rel < 1e-8;
        }
        // alpha = 0: unbounded, affine growth
        let sup_at = |end: f64| {
            let mut s = 0.0f64;
            for i in 0..=400 {
                let t = end * i as f64 / 400.0;
                s = s.max(if_single(t, j0, k, g, 0.0).abs());
            }
            s
        };
        let ratio = sup_at(2e6) / sup_at(1e6);
        pass &= (1.9..=2.1).contains(&ratio);
    }
    report(
        6,
        "influence bounded iff alpha > 0",
        pass,
        &format!("max candidate mismatch {worst_rel:.2e}; alpha=0 sup doubles with the grid"),
    );
    assert!(pass);
}

/// Criterion 7: Gross-error sensitivity decreases strictly in alpha and does not
/// increase in k, for all three tail types and both direction rules.
///
/// Known red in one cell: at gamma = 1 with the k/5 direction rule, the
/// sensitivity reaches its minimum near alpha = 0.5 and then rises about 20%
/// by alpha = 1 — the first-order closed form shows the same turn, so the
/// figure-level "decreasing in alpha" reading does not extend to that panel.
/// Every other cell is strictly decreasing in alpha, monotone decrease holds
/// up to alpha = 0.5 everywhere, and the k-monotonicity holds in all cells.
#[test]
fn criterion_07_sensitivity_monotonicity() {
    let mut pass = true;
    let mut failing = Vec::new();
    let mut alpha_mono_to_half = true;
    let mut k_mono = true;
    for &g in &[-1.0, 0.0, 1.0] {
        for rule in [2usize, 5] {
            // strictly decreasing in alpha at k = 100
            let k = 100;
            let j0 = (k / rule).clamp(1, k - 1);
            let vals: Vec<f64> = (1..=10)
                .map(|i| gross_error_sensitivity(j0, k, g, i as f64 / 10.0))
                .collect();
            let mono = vals.windows(2).all(|w| w[1] < w[0]);
            alpha_mono_to_half &= vals[..5].windows(2).all(|w| w[1] < w[0]);
            if !mono {
                failing.push(format!("(gamma {g}, j0=k/{rule})"));
            }
            pass &= mono;
            // non-increasing in k at alpha = 0.3
            let mut prev = f64::INFINITY;
            for k in (50..=300).step_by(50) {
                let j0 = (k / rule).clamp(1, k - 1);
                let s = gross_error_sensitivity(j0, k, g, 0.3);
                k_mono &= s <= prev;
                prev = s;
            }
        }
    }
    pass &= k_mono;
    report(
        7,
        "sensitivity monotone in alpha and k",
        pass,
        &format!(
            "k-monotone {k_mono}; alpha-monotone everywhere up to 0.5: {alpha_mono_to_half}; \
             full-range alpha turn in [{}]",
            failing.join(", ")
        ),
    );
    assert!(
        k_mono && alpha_mono_to_half,
        "monotonicity broken outside the documented cell"
    );
    assert!(
        pass,
        "documented alpha turn past 0.5 at (gamma=1, j0=k/5): {failing:?}"
    );
}

/// Criterion 8: Large-k influence dichotomy. The alpha = 0 slope stability holds. The
/// second clause pins a 10% plateau over t in {10, 1e2, 1e3, 1e4}: at t = 10
/// the damping exp(-alpha*t/theta) is only exp(-3(1-u)), so the moved mass
/// still contributes ~4x the plateau value, for every gamma and both psi
/// profiles (verified against a 2e6-panel brute-force evaluation of the same
/// formula). The plateau tightens below 10% only from t ~ 1e2. The clause is
/// asserted as stated and is expected red; the companion check shows the
/// {1e2, 1e3, 1e4} plateau does satisfy the 10% bound.
#[test]
fn criterion_08_asymptotic_influence_dichotomy() {
    // alpha = 0: affine growth, slope stable across decades
    let f = |t: f64| asymptotic_if_all(t, PsiFamily::Constant, 1.0, 0.0).unwrap();
    let slopes = [
        (f(100.0) - f(10.0)) / 90.0,
        (f(1000.0) - f(100.0)) / 900.0,
        (f(10_000.0) - f(1000.0)) / 9000.0,
    ];
    let slope_ok = slopes
        .windows(2)
        .all(|w| (w[1] - w[0]).abs() <= 0.05 * w[0].abs().max(w[1].abs()));

    // alpha = 0.3: bounded plateau
    let vals: Vec<f64> = [10.0, 100.0, 1000.0, 10_000.0]
        .iter()
        .map(|&t| asymptotic_if_all(t, PsiFamily::Constant, 1.0, 0.3).unwrap())
        .collect();
    let spread = |v: &[f64]| {
        let hi = v.iter().fold(f64::NEG_INFINITY, |m, x| m.max(*x));
        let lo = v.iter().fold(f64::INFINITY, |m, x| m.min(*x));
        let max_abs = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        (hi - lo) / max_abs
    };
    let full = spread(&vals);
    let tail = spread(&vals[1..]);
    let plateau_ok = full < 0.10;
    let pass = slope_ok && plateau_ok;
    report(
        8,
        "asymptotic influence dichotomy",
        pass,
        &format!(
            "alpha=0 slopes {slopes:?}; alpha=0.3 spread/max {full:.2} over t=10..1e4 \
             (known red: transient at t=10; {tail:.3} over t=1e2..1e4)"
        ),
    );
    assert!(slope_ok, "slope instability: {slopes:?}");
    assert!(tail < 0.10, "plateau from 1e2 broken: {vals:?}");
    assert!(
        plateau_ok,
        "documented spec-calibration defect: t=10 transient is ~4x the plateau"
    );
}

/// Criterion 9: Contamination robustness headline: with 15% heavy contamination at
/// k = 200, every alpha > 0 beats the likelihood fit on bias and MSE, and
/// the alpha = 0.3 MSE gap exceeds the oracle-frozen factor 1.4.
#[test]
fn criterion_09_contamination_robustness() {
    let s = Scenario {
        name: "headline".into(),
        mixture: MixtureSpec::contaminated(
            DistributionSpec::student_t(2.0).unwrap(),
            DistributionSpec::student_t(1.0 / 3.0).unwrap(),
            0.15,
        )
        .unwrap(),
        n: 500,
        replications: 500,
        k_grid: vec![200],
        alpha_set: vec![0.0, 0.3, 0.5, 1.0],
        estimators: vec![EstimatorKind::MdpdeEr],
        base_seed: 424_242,
    };
    let rows = run_scenario(&s).unwrap();
    let row = |alpha: f64| rows.iter().find(|r| r.alpha == alpha).unwrap();
    let mb = row(0.0);
    let mut pass = true;
    for &alpha in &[0.3, 0.5, 1.0] {
        let r = row(alpha);
        pass &= r.bias.abs() < mb.bias.abs() && r.mse < mb.mse;
    }
    let ratio = mb.mse / row(0.3).mse;
    pass &= ratio >= 1.4;
    report(
        9,
        "contamination robustness headline",
        pass,
        &format!(
            "MB bias {:+.3} mse {:.3}; alpha=0.3 bias {:+.3} mse {:.3}; MSE ratio {ratio:.2} (frozen 1.4)",
            mb.bias,
            mb.mse,
            row(0.3).bias,
            row(0.3).mse
        ),
    );
    assert!(pass);
}

/// Criterion 10: Location-scale invariance of the exponential-regression estimators.
#[test]
fn criterion_10_location_scale_invariance() {
    let families = [
        DistributionSpec::burr(1.0, 1.0, 1.0).unwrap(),
        DistributionSpec::log_normal(),
        DistributionSpec::uniform01(),
        DistributionSpec::frechet(0.5).unwrap(),
        DistributionSpec::student_t(2.0).unwrap(),
        DistributionSpec::weibull(1.0, 2.0).unwrap(),
        DistributionSpec::reversed_burr(1.0, 1.0, 1.0, 2.0).unwrap(),
    ];
    let mut worst = 0.0f64;
    for i in 0..50 {
        let mut rng = stream(990 + i as u64);
        let spec = families[i % families.len()];
        let xs = spec.sample(200, &mut rng).unwrap();
        let a = 10f64.powf(rng.gen_range(-1.0..1.0));
        let b = rng.gen_range(-5.0..5.0);
        let ts: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let k = 80;
        let y1 = scaled_log_ratios(&xs, k).unwrap();
        let y2 = scaled_log_ratios(&ts, k).unwrap();
        for &alpha in &[0.0, 0.3, 1.0] {
            let cfg = DpdConfig::new(alpha, k);
            let g1 = estimate_mdpde_er(&y1, &cfg).unwrap().gamma_hat;
            let g2 = estimate_mdpde_er(&y2, &cfg).unwrap().gamma_hat;
            worst = worst.max((g1 - g2).abs());
        }
        let cfg = DpdConfig::new(0.0, k);
        let g1 = estimate_mb(&y1, &cfg).unwrap().gamma_hat;
        let g2 = estimate_mb(&y2, &cfg).unwrap().gamma_hat;
        worst = worst.max((g1 - g2).abs());
    }
    let pass = worst < 1e-8;
    report(
        10,
        "location-scale invariance",
        pass,
        &format!("max abs dev {worst:.3e}"),
    );
    assert!(pass);
}

/// Criterion 11: Sampler validation: KS distance below 0.01 against the closed-form
/// c.d.f. at 1e5 draws for the inverse-c.d.f. families.
#[test]
fn criterion_11_sampler_validation() {
    let specs = [
        DistributionSpec::burr(1.0, 1.0, 1.0).unwrap(),
        DistributionSpec::frechet(0.5).unwrap(),
        DistributionSpec::weibull(1.0, 2.0).unwrap(),
        DistributionSpec::uniform01(),
        DistributionSpec::reversed_burr(1.0, 1.0, 1.0, 2.0).unwrap(),
    ];
    let mut worst = 0.0f64;
    for (i, spec) in specs.iter().enumerate() {
        let xs = spec
            .sample(100_000, &mut replication_stream(7000, i as u64))
            .unwrap();
        worst = worst.max(ks_statistic(&xs, |x| spec.cdf(x)));
    }
    let pass = worst < 0.01;
    report(
        11,
        "sampler KS validation",
        pass,
        &format!("max KS distance {worst:.4}"),
    );
    assert!(pass);
}

/// Replicated-experiment identities that gate the harness itself.
#[test]
fn harness_determinism_and_moment_identities() {
    let s = Scenario {
        name: "gate".into(),
        mixture: MixtureSpec::contaminated(
            DistributionSpec::burr(1.0, 1.0, 1.0).unwrap(),
            DistributionSpec::frechet(3.0).unwrap(),
            0.05,
        )
        .unwrap(),
        n: 200,
        replications: 20,
        k_grid: vec![40, 80],
        alpha_set: vec![0.0, 0.3],
        estimators: vec![
            EstimatorKind::Hill,
            EstimatorKind::Mb,
            EstimatorKind::MdpdeEr,
        ],
        base_seed: 31,
    };
    let a = run_scenario(&s).unwrap();
    let b = run_scenario(&s).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 3 * 2 * 2);
    for r in &a {
        if r.n_converged > 0 {
            assert!(r.mse + 1e-12 >= r.bias * r.bias);
        }
    }
    // one sample feeds every estimator: drop hill, er rows unchanged
    let mut s2 = s.clone();
    s2.estimators = vec![EstimatorKind::MdpdeEr];
    let only = run_scenario(&s2).unwrap();
    let er: Vec<_> = a
        .iter()
        .filter(|r| r.estimator == EstimatorKind::MdpdeEr)
        .collect();
    for (x, y) in er.iter().zip(&only) {
        assert_eq!(**x, *y);
    }
}

/// The contaminated t(2) sample drives exclusion handling: contaminant draws
/// can push the threshold statistic negative at large k without aborting.
#[test]
fn harness_tolerates_estimator_failures() {
    let s = Scenario {
        name: "exclusions".into(),
        mixture: MixtureSpec::pure(DistributionSpec::student_t(2.0).unwrap()),
        n: 400,
        replications: 5,
        k_grid: vec![300],
        alpha_set: vec![0.5],
        estimators: vec![EstimatorKind::MdpdeKl, EstimatorKind::MdpdeEr],
        base_seed: 9,
    };
    let rows = run_scenario(&s).unwrap();
    // the comparator needs a positive threshold, which fails at k=300 here
    let kl = rows
        .iter()
        .find(|r| r.estimator == EstimatorKind::MdpdeKl)
        .unwrap();
    assert!(kl.n_converged < 5);
    let er = rows
        .iter()
        .find(|r| r.estimator == EstimatorKind::MdpdeEr)
        .unwrap();
    assert_eq!(er.n_converged, 5);
}
