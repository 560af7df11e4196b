//! The seven model families used throughout the simulation study, each with
//! a known true tail index, an inverse-c.d.f. (or composition) sampler and a
//! closed-form c.d.f. for validation, plus an epsilon-contamination mixer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{open01, standard_gamma, standard_normal, StreamRng};
use crate::special::{beta_inc, normal_cdf};

/// A sampleable family with fixed parameters.
///
/// Tail indices: `student_t` 1/nu, `burr` 1/(tau*lambda), `frechet` gamma,
/// `log_normal` and `weibull` 0, `uniform01` -1, `reversed_burr`
/// -1/(tau*lambda).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    /// Student's t with `nu` degrees of freedom (fractional `nu` allowed).
    StudentT { nu: f64 },
    /// Burr distribution with survival function `(1 + x^tau / beta)^(-lambda)`.
    Burr { beta: f64, tau: f64, lambda: f64 },
    /// Frechet distribution with c.d.f. `exp(-x^(-1/gamma))`.
    Frechet { gamma: f64 },
    /// Standard log-normal: exp of a standard normal.
    LogNormal,
    /// Weibull distribution with survival function `exp(-lambda x^tau)`.
    Weibull { lambda: f64, tau: f64 },
    /// Uniform on (0, 1).
    Uniform01,
    /// Reversed Burr with finite right endpoint `x_plus` and survival
    /// function `(1 + (x_plus - x)^(-tau) / beta)^(-lambda)` for `x < x_plus`.
    ReversedBurr {
        beta: f64,
        tau: f64,
        lambda: f64,
        x_plus: f64,
    },
}

impl DistributionSpec {
    pub fn student_t(nu: f64) -> Result<Self> {
        require_positive("nu", nu)?;
        Ok(Self::StudentT { nu })
    }

    pub fn burr(beta: f64, tau: f64, lambda: f64) -> Result<Self> {
        require_positive("beta", beta)?;
        require_positive("tau", tau)?;
        require_positive("lambda", lambda)?;
        Ok(Self::Burr { beta, tau, lambda })
    }

    pub fn frechet(gamma: f64) -> Result<Self> {
        require_positive("gamma", gamma)?;
        Ok(Self::Frechet { gamma })
    }

    pub fn log_normal() -> Self {
        Self::LogNormal
    }

    pub fn weibull(lambda: f64, tau: f64) -> Result<Self> {
        require_positive("lambda", lambda)?;
        require_positive("tau", tau)?;
        Ok(Self::Weibull { lambda, tau })
    }

    pub fn uniform01() -> Self {
        Self::Uniform01
    }

    pub fn reversed_burr(beta: f64, tau: f64, lambda: f64, x_plus: f64) -> Result<Self> {
        require_positive("beta", beta)?;
        require_positive("tau", tau)?;
        require_positive("lambda", lambda)?;
        if !x_plus.is_finite() {
            return Err(Error::InvalidParam("x_plus must be finite".into()));
        }
        Ok(Self::ReversedBurr {
            beta,
            tau,
            lambda,
            x_plus,
        })
    }

    /// Re-check parameter constraints; used after deserializing a config.
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::StudentT { nu } => require_positive("nu", nu),
            Self::Burr { beta, tau, lambda } => {
                require_positive("beta", beta)?;
                require_positive("tau", tau)?;
                require_positive("lambda", lambda)
            }
            Self::Frechet { gamma } => require_positive("gamma", gamma),
            Self::LogNormal | Self::Uniform01 => Ok(()),
            Self::Weibull { lambda, tau } => {
                require_positive("lambda", lambda)?;
                require_positive("tau", tau)
            }
            Self::ReversedBurr {
                beta,
                tau,
                lambda,
                x_plus,
            } => {
                require_positive("beta", beta)?;
                require_positive("tau", tau)?;
                require_positive("lambda", lambda)?;
                if x_plus.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParam("x_plus must be finite".into()))
                }
            }
        }
    }

    /// The true tail index of the family.
    pub fn true_tail_index(&self) -> f64 {
        match *self {
            Self::StudentT { nu } => 1.0 / nu,
            Self::Burr { tau, lambda, .. } => 1.0 / (tau * lambda),
            Self::Frechet { gamma } => gamma,
            Self::LogNormal | Self::Weibull { .. } => 0.0,
            Self::Uniform01 => -1.0,
            Self::ReversedBurr { tau, lambda, .. } => -1.0 / (tau * lambda),
        }
    }

    /// Closed-form c.d.f., used by the sampler validation tests.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            Self::StudentT { nu } => {
                if x == 0.0 {
                    return 0.5;
                }
                let p = beta_inc(nu / 2.0, 0.5, nu / (nu + x * x));
                if x > 0.0 {
                    1.0 - 0.5 * p
                } else {
                    0.5 * p
                }
            }
            Self::Burr { beta, tau, lambda } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - (1.0 + x.powf(tau) / beta).powf(-lambda)
                }
            }
            Self::Frechet { gamma } => {
                if x <= 0.0 {
                    0.0
                } else {
                    (-x.powf(-1.0 / gamma)).exp()
                }
            }
            Self::LogNormal => {
                if x <= 0.0 {
                    0.0
                } else {
                    normal_cdf(x.ln())
                }
            }
            Self::Weibull { lambda, tau } => {
                if x <= 0.0 {
                    0.0
                } else {
                    1.0 - (-lambda * x.powf(tau)).exp()
                }
            }
            Self::Uniform01 => x.clamp(0.0, 1.0),
            Self::ReversedBurr {
                beta,
                tau,
                lambda,
                x_plus,
            } => {
                if x >= x_plus {
                    1.0
                } else {
                    1.0 - (1.0 + (x_plus - x).powf(-tau) / beta).powf(-lambda)
                }
            }
        }
    }

    /// One draw from the family.
    pub fn draw(&self, rng: &mut StreamRng) -> f64 {
        match *self {
            Self::StudentT { nu } => {
                // normal over sqrt of a rescaled gamma; exact for fractional nu
                let z = standard_normal(rng);
                let g = 2.0 * standard_gamma(nu / 2.0, rng); // chi-square_nu
                z / (g / nu).sqrt()
            }
            Self::Burr { beta, tau, lambda } => {
                let u = open01(rng);
                (beta * (u.powf(-1.0 / lambda) - 1.0)).powf(1.0 / tau)
            }
            Self::Frechet { gamma } => {
                let u = open01(rng);
                (-u.ln()).powf(-gamma)
            }
            Self::LogNormal => standard_normal(rng).exp(),
            Self::Weibull { lambda, tau } => {
                let u = open01(rng);
                (-u.ln() / lambda).powf(1.0 / tau)
            }
            Self::Uniform01 => open01(rng),
            Self::ReversedBurr {
                beta,
                tau,
                lambda,
                x_plus,
            } => {
                let u = open01(rng);
                x_plus - (beta * (u.powf(-1.0 / lambda) - 1.0)).powf(-1.0 / tau)
            }
        }
    }

    /// `n` i.i.d. draws. Rejects `n = 0`.
    pub fn sample(&self, n: usize, rng: &mut StreamRng) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidParam("sample size must be at least 1".into()));
        }
        Ok((0..n).map(|_| self.draw(rng)).collect())
    }
}

fn require_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam(format!(
            "{name} must be a positive real, got {v}"
        )))
    }
}

/// An epsilon-contaminated mixture: a `base` family polluted by a fixed
/// fraction of draws from a `contaminant`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub base: DistributionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contaminant: Option<DistributionSpec>,
    #[serde(default)]
    pub epsilon: f64,
}

impl MixtureSpec {
    /// A pure, uncontaminated model.
    pub fn pure(base: DistributionSpec) -> Self {
        Self {
            base,
            contaminant: None,
            epsilon: 0.0,
        }
    }

    pub fn contaminated(
        base: DistributionSpec,
        contaminant: DistributionSpec,
        epsilon: f64,
    ) -> Result<Self> {
        let mix = Self {
            base,
            contaminant: Some(contaminant),
            epsilon,
        };
        mix.validate()?;
        Ok(mix)
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if let Some(c) = &self.contaminant {
            c.validate()?;
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::InvalidParam(format!(
                "epsilon must lie in [0, 1), got {}",
                self.epsilon
            )));
        }
        if self.epsilon > 0.0 && self.contaminant.is_none() {
            return Err(Error::InvalidParam(
                "epsilon > 0 requires a contaminant".into(),
            ));
        }
        Ok(())
    }
}

/// Draw a contaminated sample of size `n`: exactly `round(epsilon * n)`
/// observations come from the contaminant, the rest from the base, and the
/// combined sample is shuffled. With `epsilon = 0` the stream is bit-identical
/// to `base.sample(n, rng)`.
///
/// The contaminant count is deterministic rather than Bernoulli-thinned,
/// which keeps replication variance down.
pub fn sample_contaminated(mix: &MixtureSpec, n: usize, rng: &mut StreamRng) -> Result<Vec<f64>> {
    mix.validate()?;
    if n == 0 {
        return Err(Error::InvalidParam("sample size must be at least 1".into()));
    }
    if mix.epsilon == 0.0 {
        return mix.base.sample(n, rng);
    }
    let contaminant = mix.contaminant.as_ref().expect("validated above");
    let m = ((mix.epsilon * n as f64).round() as usize).min(n);
    let mut xs = Vec::with_capacity(n);
    for _ in 0..n - m {
        xs.push(mix.base.draw(rng));
    }
    for _ in 0..m {
        xs.push(contaminant.draw(rng));
    }
    // Fisher-Yates off the same stream keeps the interleave reproducible.
    for i in (1..xs.len()).rev() {
        let j = rng.gen_range(0..=i);
        xs.swap(i, j);
    }
    Ok(xs)
}

use rand::Rng as _;

/// Two-sided Kolmogorov-Smirnov distance between a sample and a c.d.f.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d
            .max((f - i as f64 / n).abs())
            .max(((i + 1) as f64 / n - f).abs());
    }
    d
}
