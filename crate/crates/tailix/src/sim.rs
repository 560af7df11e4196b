//! Replicated sampling experiments: draw contaminated samples, apply every
//! configured estimator across an (alpha, k) grid, and aggregate empirical
//! bias and MSE.
//!
//! Replications are independent given their stream seeds (`base_seed ^ r`)
//! and may run in parallel; the aggregation always folds in replication
//! order, so parallel and serial runs produce identical summaries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::distributions::{sample_contaminated, DistributionSpec, MixtureSpec};
use crate::error::{Error, Result};
use crate::estimators::{
    estimate_kl, estimate_mb, estimate_mdpde_er, hill_from_excesses, DpdConfig, EstimateResult,
    EstimatorKind,
};
use crate::rng::replication_stream;
use crate::tail_transform::{log_excesses, scaled_log_ratios, theta, ScaledLogRatios};

/// One simulation experiment: a (possibly contaminated) sampling model plus
/// the estimator grid to apply to each replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub mixture: MixtureSpec,
    /// Sample size per replication.
    pub n: usize,
    pub replications: usize,
    /// Numbers of extremes to evaluate, strictly increasing, all below `n`.
    pub k_grid: Vec<usize>,
    /// Divergence tuning parameters to evaluate.
    pub alpha_set: Vec<f64>,
    pub estimators: Vec<EstimatorKind>,
    pub base_seed: u64,
}

impl Scenario {
    /// The target of every bias computation: the tail index of the base model.
    pub fn true_gamma(&self) -> f64 {
        self.mixture.base.true_tail_index()
    }

    pub fn validate(&self) -> Result<()> {
        self.mixture.validate()?;
        if self.n < 3 {
            return Err(Error::Config("n: sample size must be at least 3".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications: must be at least 1".into()));
        }
        if self.k_grid.is_empty() {
            return Err(Error::Config("k_grid: must not be empty".into()));
        }
        if self.k_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("k_grid: must be strictly increasing".into()));
        }
        if self.k_grid[0] < 2 || *self.k_grid.last().unwrap() >= self.n {
            return Err(Error::Config(
                "k_grid: entries must satisfy 2 <= k < n".into(),
            ));
        }
        if self.alpha_set.is_empty() {
            return Err(Error::Config("alpha_set: must not be empty".into()));
        }
        if self.alpha_set.iter().any(|&a| !(a >= 0.0)) {
            return Err(Error::Config("alpha_set: entries must be >= 0".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("estimators: must not be empty".into()));
        }
        Ok(())
    }
}

/// Aggregated outcome for one (estimator, alpha, k) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub estimator: EstimatorKind,
    pub alpha: f64,
    pub k: usize,
    /// `mean(gamma_hat) - true_gamma` over converged fits; NaN if none converged.
    pub bias: f64,
    /// `mean((gamma_hat - true_gamma)^2)` over converged fits.
    pub mse: f64,
    pub n_converged: usize,
}

fn cell_index(ei: usize, ai: usize, ki: usize, n_alpha: usize, n_k: usize) -> usize {
    (ei * n_alpha + ai) * n_k + ki
}

fn one_replication(s: &Scenario, r: usize) -> Vec<Option<f64>> {
    let n_alpha = s.alpha_set.len();
    let n_k = s.k_grid.len();
    let mut cells = vec![None; s.estimators.len() * n_alpha * n_k];

    let mut rng = replication_stream(s.base_seed, r as u64);
    let xs = sample_contaminated(&s.mixture, s.n, &mut rng).expect("scenario validated");

    let wants_ratios = s
        .estimators
        .iter()
        .any(|e| matches!(e, EstimatorKind::Mb | EstimatorKind::MdpdeEr));
    let wants_excesses = s
        .estimators
        .iter()
        .any(|e| matches!(e, EstimatorKind::Hill | EstimatorKind::MdpdeKl));

    for (ki, &k) in s.k_grid.iter().enumerate() {
        let y = if wants_ratios {
            scaled_log_ratios(&xs, k).ok()
        } else {
            None
        };
        let z = if wants_excesses {
            log_excesses(&xs, k).ok()
        } else {
            None
        };
        let hill_fit = z.as_ref().map(hill_from_excesses);
        // the likelihood fit ignores alpha, so compute it once per k
        let mb_fit = if s.estimators.contains(&EstimatorKind::Mb) {
            y.as_ref()
                .and_then(|y| estimate_mb(y, &DpdConfig::new(0.0, k)).ok())
        } else {
            None
        };
        for (ei, est) in s.estimators.iter().enumerate() {
            for (ai, &alpha) in s.alpha_set.iter().enumerate() {
                let fit: Option<EstimateResult> = match est {
                    EstimatorKind::Hill => hill_fit.clone(),
                    EstimatorKind::Mb => mb_fit.clone(),
                    EstimatorKind::MdpdeEr => y
                        .as_ref()
                        .and_then(|y| estimate_mdpde_er(y, &DpdConfig::new(alpha, k)).ok()),
                    EstimatorKind::MdpdeKl => z
                        .as_ref()
                        .and_then(|z| estimate_kl(z, &DpdConfig::new(alpha, k)).ok()),
                };
                cells[cell_index(ei, ai, ki, n_alpha, n_k)] =
                    fit.filter(|f| f.converged).map(|f| f.gamma_hat);
            }
        }
    }
    cells
}

/// Run every replication of a scenario and aggregate. Rows cover the full
/// estimator x alpha x k cross product; estimators that do not depend on
/// alpha repeat their figures across alpha rows. Estimator failures within a
/// replication (ties, non-positive thresholds, non-convergence) exclude that
/// fit from its cell without aborting the run.
pub fn run_scenario(s: &Scenario) -> Result<Vec<SummaryRow>> {
    s.validate()?;
    let per_rep: Vec<Vec<Option<f64>>> = (0..s.replications)
        .into_par_iter()
        .map(|r| one_replication(s, r))
        .collect();

    let n_alpha = s.alpha_set.len();
    let n_k = s.k_grid.len();
    let gamma0 = s.true_gamma();
    let mut rows = Vec::with_capacity(s.estimators.len() * n_alpha * n_k);
    for (ei, est) in s.estimators.iter().enumerate() {
        for (ai, &alpha) in s.alpha_set.iter().enumerate() {
            for (ki, &k) in s.k_grid.iter().enumerate() {
                let idx = cell_index(ei, ai, ki, n_alpha, n_k);
                let mut count = 0usize;
                let mut sum = 0.0;
                let mut sum_sq = 0.0;
                // fixed replication order keeps the reduction deterministic
                for rep in &per_rep {
                    if let Some(g) = rep[idx] {
                        let dev = g - gamma0;
                        count += 1;
                        sum += dev;
                        sum_sq += dev * dev;
                    }
                }
                let (bias, mse) = if count > 0 {
                    (sum / count as f64, sum_sq / count as f64)
                } else {
                    (f64::NAN, f64::NAN)
                };
                rows.push(SummaryRow {
                    estimator: *est,
                    alpha,
                    k,
                    bias,
                    mse,
                    n_converged: count,
                });
            }
        }
    }
    Ok(rows)
}

/// Write the summary rows in the frozen CSV schema.
pub fn write_summary_csv(
    s: &Scenario,
    rows: &[SummaryRow],
    w: &mut impl Write,
) -> std::io::Result<()> {
    writeln!(
        w,
        "scenario_name,estimator,alpha,k,bias,mse,n_converged,replications,seed"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            s.name,
            r.estimator.tag(),
            crate::numfmt::sig12(r.alpha),
            r.k,
            crate::numfmt::sig12(r.bias),
            crate::numfmt::sig12(r.mse),
            r.n_converged,
            s.replications,
            s.base_seed
        )?;
    }
    Ok(())
}

/// Outcome of a synthetic exponential-regression run.
#[derive(Debug, Clone, PartialEq)]
pub struct ErmOracleRun {
    pub summary: SummaryRow,
    /// Sample variance of `sqrt(k-1) * (gamma_hat - gamma)` over converged
    /// replications; comparable to the asymptotic variance.
    pub scaled_variance: f64,
}

/// Draw the transformed observations directly from their limiting
/// exponential model, `W_j ~ Exp(theta_j(gamma))`, bypassing the raw-sample
/// transform, and fit the divergence estimator to each replication. This
/// isolates estimator behavior from the model approximation error.
pub fn run_erm_oracle(
    gamma: f64,
    k: usize,
    alpha: f64,
    replications: usize,
    seed: u64,
) -> Result<ErmOracleRun> {
    if k < 10 {
        return Err(Error::InvalidParam(format!("k must be >= 10, got {k}")));
    }
    if replications == 0 {
        return Err(Error::InvalidParam("replications must be >= 1".into()));
    }
    let kp1 = (k + 1) as f64;
    let thetas: Vec<f64> = (1..k).map(|j| theta(gamma, j as f64 / kp1)).collect();
    let cfg = DpdConfig::new(alpha, k);
    let devs: Vec<Option<f64>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = replication_stream(seed, r as u64);
            let w: Vec<f64> = thetas
                .iter()
                .map(|&t| -t * crate::rng::open01(&mut rng).ln())
                .collect();
            let y = ScaledLogRatios::from_parts(w, k).expect("constructed with k-1 values");
            estimate_mdpde_er(&y, &cfg)
                .ok()
                .filter(|f| f.converged)
                .map(|f| f.gamma_hat - gamma)
        })
        .collect();

    let used: Vec<f64> = devs.iter().flatten().copied().collect();
    if used.is_empty() {
        return Err(Error::NonConvergence);
    }
    let count = used.len();
    let bias = used.iter().sum::<f64>() / count as f64;
    let mse = used.iter().map(|d| d * d).sum::<f64>() / count as f64;
    let scale = ((k - 1) as f64).sqrt();
    let scaled_mean = scale * bias;
    let scaled_variance = if count > 1 {
        used.iter()
            .map(|d| (scale * d - scaled_mean).powi(2))
            .sum::<f64>()
            / (count - 1) as f64
    } else {
        0.0
    };
    Ok(ErmOracleRun {
        summary: SummaryRow {
            estimator: EstimatorKind::MdpdeEr,
            alpha,
            k,
            bias,
            mse,
            n_converged: count,
        },
        scaled_variance,
    })
}

const DEFAULT_SEED: u64 = 715_517;

fn default_k_grid() -> Vec<usize> {
    (1..=15).map(|i| 20 * i).collect() // 20, 40, ..., 300
}

fn scenario(name: &str, mixture: MixtureSpec) -> Scenario {
    let estimators = if mixture.base.true_tail_index() > 0.0 {
        vec![
            EstimatorKind::Hill,
            EstimatorKind::Mb,
            EstimatorKind::MdpdeEr,
            EstimatorKind::MdpdeKl,
        ]
    } else {
        // the comparator estimators only make sense for Pareto-type tails
        vec![EstimatorKind::Mb, EstimatorKind::MdpdeEr]
    };
    Scenario {
        name: name.to_string(),
        mixture,
        n: 500,
        replications: 100,
        k_grid: default_k_grid(),
        alpha_set: vec![0.0, 0.3, 0.5, 1.0],
        estimators,
        base_seed: DEFAULT_SEED,
    }
}

/// The named experiment catalog: the seven pure models, same-family
/// contaminations, cross-family same-tail-type contaminations, and the
/// cross-type cases, the contaminated ones at 5% and 15% each.
pub fn builtin_scenarios() -> Vec<Scenario> {
    let student2 = DistributionSpec::student_t(2.0).expect("valid");
    let student_third = DistributionSpec::student_t(1.0 / 3.0).expect("valid");
    let burr111 = DistributionSpec::burr(1.0, 1.0, 1.0).expect("valid");
    let burr_tau_quarter = DistributionSpec::burr(1.0, 0.25, 1.0).expect("valid");
    let burr4 = DistributionSpec::burr(4.0, 0.25, 1.0).expect("valid");
    let frechet_half = DistributionSpec::frechet(0.5).expect("valid");
    let frechet3 = DistributionSpec::frechet(3.0).expect("valid");
    let lognormal = DistributionSpec::log_normal();
    let weibull = DistributionSpec::weibull(1.0, 2.0).expect("valid");
    let uniform = DistributionSpec::uniform01();
    let rev_burr = DistributionSpec::reversed_burr(1.0, 1.0, 1.0, 2.0).expect("valid");

    let mut out = vec![
        scenario("pure_m1_student_t", MixtureSpec::pure(student2)),
        scenario("pure_m2_burr", MixtureSpec::pure(burr111)),
        scenario("pure_m3_frechet", MixtureSpec::pure(frechet_half)),
        scenario("pure_m4_lognormal", MixtureSpec::pure(lognormal)),
        scenario("pure_m5_weibull", MixtureSpec::pure(weibull)),
        scenario("pure_m6_uniform", MixtureSpec::pure(uniform)),
        scenario("pure_m7_reversed_burr", MixtureSpec::pure(rev_burr)),
    ];

    let mut contaminated = |name: &str, base: DistributionSpec, cont: DistributionSpec| {
        for (suffix, eps) in [("eps05", 0.05), ("eps15", 0.15)] {
            out.push(scenario(
                &format!("{name}_{suffix}"),
                MixtureSpec::contaminated(base, cont, eps).expect("valid"),
            ));
        }
    };

    // same family, different tail index
    contaminated("t2_contam_t13", student2, student_third);
    contaminated("frechet05_contam_frechet3", frechet_half, frechet3);
    contaminated("burr_contam_burr_tau025", burr111, burr_tau_quarter);
    // different family, same tail type
    contaminated("lognormal_contam_weibull", lognormal, weibull);
    contaminated("t2_contam_frechet3", student2, frechet3);
    // different tail type
    contaminated("lognormal_contam_t13", lognormal, student_third);
    contaminated("weibull_contam_t13", weibull, student_third);
    contaminated("weibull_contam_uniform", weibull, uniform);
    contaminated("uniform_contam_weibull", uniform, weibull);
    contaminated("uniform_contam_t13", uniform, student_third);
    contaminated("reversed_burr_contam_burr", rev_burr, burr4);

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_scenario() -> Scenario {
        Scenario {
            name: "test".into(),
            mixture: MixtureSpec::pure(DistributionSpec::burr(1.0, 1.0, 1.0).unwrap()),
            n: 200,
            replications: 10,
            k_grid: vec![50, 80],
            alpha_set: vec![0.0, 0.3],
            estimators: vec![EstimatorKind::Hill, EstimatorKind::MdpdeEr],
            base_seed: 5,
        }
    }

    #[test]
    fn rows_cover_the_cross_product() {
        let s = small_scenario();
        let rows = run_scenario(&s).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 2);
    }

    #[test]
    fn runs_are_deterministic() {
        let s = small_scenario();
        let a = run_scenario(&s).unwrap();
        let b = run_scenario(&s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn estimator_rows_do_not_depend_on_the_estimator_set() {
        let mut s = small_scenario();
        let with_both = run_scenario(&s).unwrap();
        s.estimators = vec![EstimatorKind::MdpdeEr];
        let only_er = run_scenario(&s).unwrap();
        let er_rows: Vec<&SummaryRow> = with_both
            .iter()
            .filter(|r| r.estimator == EstimatorKind::MdpdeEr)
            .collect();
        assert_eq!(er_rows.len(), only_er.len());
        for (a, b) in er_rows.iter().zip(&only_er) {
            assert_eq!(**a, *b);
        }
    }

    #[test]
    fn mse_dominates_squared_bias() {
        let rows = run_scenario(&small_scenario()).unwrap();
        for r in &rows {
            if r.n_converged > 0 {
                assert!(r.mse + 1e-12 >= r.bias * r.bias, "{r:?}");
            }
        }
    }

    #[test]
    fn single_replication_moments_are_degenerate() {
        let mut s = small_scenario();
        s.replications = 1;
        for r in run_scenario(&s).unwrap() {
            if r.n_converged == 1 {
                assert!((r.mse - r.bias * r.bias).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hill_bias_and_mse_on_pure_burr() {
        let s = Scenario {
            name: "hill_burr".into(),
            mixture: MixtureSpec::pure(DistributionSpec::burr(1.0, 1.0, 1.0).unwrap()),
            n: 500,
            replications: 100,
            k_grid: vec![100],
            alpha_set: vec![0.0],
            estimators: vec![EstimatorKind::Hill],
            base_seed: 99,
        };
        let rows = run_scenario(&s).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].bias.abs() < 0.15, "bias {}", rows[0].bias);
        assert!(rows[0].mse < 0.1, "mse {}", rows[0].mse);
        assert_eq!(rows[0].n_converged, 100);
    }

    #[test]
    fn erm_oracle_recovers_gamma_zero_branch() {
        let run = run_erm_oracle(0.0, 500, 0.3, 40, 21).unwrap();
        assert!(run.summary.bias.abs() < 0.1, "bias {}", run.summary.bias);
        assert!(run.summary.n_converged > 0);
    }

    #[test]
    fn erm_oracle_with_exact_means_reduces_to_noiseless_fit() {
        // plumbing identity: a single replication fed the exact means gives
        // back the noiseless fixture result
        let k = 101;
        let y = ScaledLogRatios::from_parts(crate::estimators::exact_erm_means(1.0, k), k).unwrap();
        let fit = estimate_mdpde_er(&y, &DpdConfig::new(0.0, k)).unwrap();
        assert!((fit.gamma_hat - 1.0).abs() < 1e-6);
    }

    #[test]
    fn catalog_contains_the_cross_type_cases() {
        let all = builtin_scenarios();
        let vi = all
            .iter()
            .find(|s| s.name == "reversed_burr_contam_burr_eps15")
            .unwrap();
        assert_eq!(
            vi.mixture.contaminant.unwrap(),
            DistributionSpec::burr(4.0, 0.25, 1.0).unwrap()
        );
        assert_eq!(vi.mixture.epsilon, 0.15);
        for s in &all {
            s.validate().unwrap();
            assert_eq!(*s.k_grid.last().unwrap(), 300);
            assert_eq!(s.n, 500);
            assert_eq!(s.replications, 100);
            if s.name.starts_with("pure_") {
                assert_eq!(s.mixture.epsilon, 0.0);
            }
        }
        assert_eq!(all.len(), 7 + 2 * 11);
    }

    #[test]
    fn scenario_validation_names_the_field() {
        let mut s = small_scenario();
        s.k_grid = vec![50, 500];
        let err = s.validate().unwrap_err().to_string();
        assert!(err.contains("k_grid"), "{err}");
    }

    #[test]
    fn csv_schema_is_frozen() {
        let s = small_scenario();
        let rows = run_scenario(&s).unwrap();
        let mut buf = Vec::new();
        write_summary_csv(&s, &rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(
            header,
            "scenario_name,estimator,alpha,k,bias,mse,n_converged,replications,seed"
        );
        assert_eq!(text.lines().count(), 1 + rows.len());
    }
}
