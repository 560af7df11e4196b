//! Scenario configuration files.
//!
//! Two representations parse to the same [`Scenario`]: a flat key/value text
//! format meant for hand editing, and JSON (detected by a leading `{`). The
//! JSON form is exactly what `serde_json` produces for [`Scenario`], so
//! emitted catalogs can be fed straight back in.
//!
//! ```text
//! name = t2_contam_t13_eps15
//! n = 500
//! replications = 100
//! base_seed = 715517
//! epsilon = 0.15
//! k_grid = 20:300:20
//! alpha_set = 0, 0.3, 0.5, 1
//! estimators = hill, mb, mdpde_er, mdpde_kl
//!
//! base {
//!     family = student_t
//!     nu = 2
//! }
//!
//! contaminant {
//!     family = student_t
//!     nu = 0.3333333333333333
//! }
//! ```
//!
//! `k_grid` accepts either a comma list or an inclusive `lo:hi:step` range.
//! Required: `n` and the `base` block. Defaults: `replications = 100`,
//! `epsilon = 0`, `k_grid = 20:300:20`, `alpha_set = 0, 0.3, 0.5, 1`, and an
//! estimator set chosen by the sign of the base tail index.

use std::collections::BTreeMap;

use crate::distributions::{DistributionSpec, MixtureSpec};
use crate::error::{Error, Result};
use crate::estimators::EstimatorKind;
use crate::sim::Scenario;

const DEFAULT_SEED: u64 = 715_517;

/// Parse a scenario from its text or JSON form.
pub fn parse_scenario(input: &str) -> Result<Scenario> {
    let trimmed = input.trim_start();
    let scenario = if trimmed.starts_with('{') {
        serde_json::from_str::<Scenario>(trimmed)
            .map_err(|e| Error::Config(format!("invalid scenario JSON: {e}")))?
    } else {
        parse_flat(input)?
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Serialize a scenario as pretty JSON; parsing it back reproduces the
/// scenario exactly.
pub fn scenario_to_json(s: &Scenario) -> String {
    serde_json::to_string_pretty(s).expect("scenario serializes")
}

/// Serialize a scenario in the editable flat format.
pub fn scenario_to_text(s: &Scenario) -> String {
    let mut out = String::new();
    out.push_str(&format!("name = {}\n", s.name));
    out.push_str(&format!("n = {}\n", s.n));
    out.push_str(&format!("replications = {}\n", s.replications));
    out.push_str(&format!("base_seed = {}\n", s.base_seed));
    out.push_str(&format!("epsilon = {}\n", s.mixture.epsilon));
    let ks: Vec<String> = s.k_grid.iter().map(|k| k.to_string()).collect();
    out.push_str(&format!("k_grid = {}\n", ks.join(", ")));
    let alphas: Vec<String> = s.alpha_set.iter().map(|a| a.to_string()).collect();
    out.push_str(&format!("alpha_set = {}\n", alphas.join(", ")));
    let ests: Vec<String> = s.estimators.iter().map(estimator_key).collect();
    out.push_str(&format!("estimators = {}\n", ests.join(", ")));
    out.push('\n');
    out.push_str(&family_block("base", &s.mixture.base));
    if let Some(c) = &s.mixture.contaminant {
        out.push('\n');
        out.push_str(&family_block("contaminant", c));
    }
    out
}

fn estimator_key(e: &EstimatorKind) -> String {
    match e {
        EstimatorKind::Hill => "hill",
        EstimatorKind::Mb => "mb",
        EstimatorKind::MdpdeEr => "mdpde_er",
        EstimatorKind::MdpdeKl => "mdpde_kl",
    }
    .to_string()
}

fn family_block(label: &str, spec: &DistributionSpec) -> String {
    let mut kv: Vec<(&str, String)> = Vec::new();
    let family = match *spec {
        DistributionSpec::StudentT { nu } => {
            kv.push(("nu", nu.to_string()));
            "student_t"
        }
        DistributionSpec::Burr { beta, tau, lambda } => {
            kv.push(("beta", beta.to_string()));
            kv.push(("tau", tau.to_string()));
            kv.push(("lambda", lambda.to_string()));
            "burr"
        }
        DistributionSpec::Frechet { gamma } => {
            kv.push(("gamma", gamma.to_string()));
            "frechet"
        }
        DistributionSpec::LogNormal => "log_normal",
        DistributionSpec::Weibull { lambda, tau } => {
            kv.push(("lambda", lambda.to_string()));
            kv.push(("tau", tau.to_string()));
            "weibull"
        }
        DistributionSpec::Uniform01 => "uniform01",
        DistributionSpec::ReversedBurr {
            beta,
            tau,
            lambda,
            x_plus,
        } => {
            kv.push(("beta", beta.to_string()));
            kv.push(("tau", tau.to_string()));
            kv.push(("lambda", lambda.to_string()));
            kv.push(("x_plus", x_plus.to_string()));
            "reversed_burr"
        }
    };
    let mut out = format!("{label} {{\n    family = {family}\n");
    for (k, v) in kv {
        out.push_str(&format!("    {k} = {v}\n"));
    }
    out.push_str("}\n");
    out
}

fn parse_flat(input: &str) -> Result<Scenario> {
    let mut top: BTreeMap<String, String> = BTreeMap::new();
    let mut blocks: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut current_block: Option<String> = None;

    for (lineno, raw) in input.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        if let Some(rest) = line.strip_suffix('{') {
            if current_block.is_some() {
                return Err(Error::Config(format!("line {lineno}: nested block")));
            }
            let name = rest.trim();
            if name != "base" && name != "contaminant" {
                return Err(Error::Config(format!(
                    "line {lineno}: unknown block '{name}'"
                )));
            }
            if blocks.contains_key(name) {
                return Err(Error::Config(format!(
                    "line {lineno}: duplicate block '{name}'"
                )));
            }
            blocks.insert(name.to_string(), BTreeMap::new());
            current_block = Some(name.to_string());
            continue;
        }
        if line == "}" {
            if current_block.take().is_none() {
                return Err(Error::Config(format!("line {lineno}: unmatched '}}'")));
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!(
                "line {lineno}: expected 'key = value'"
            )));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        let map = match &current_block {
            Some(b) => blocks.get_mut(b).expect("block exists"),
            None => &mut top,
        };
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!(
                "line {lineno}: duplicate key '{key}'"
            )));
        }
    }
    if current_block.is_some() {
        return Err(Error::Config("unterminated block".into()));
    }

    let base = match blocks.get("base") {
        Some(kv) => family_from_kv(kv, "base")?,
        None => return Err(Error::Config("missing required block: base".into())),
    };
    let contaminant = blocks
        .get("contaminant")
        .map(|kv| family_from_kv(kv, "contaminant"))
        .transpose()?;

    let name = top.remove("name").unwrap_or_else(|| "scenario".to_string());
    let n = match top.remove("n") {
        Some(v) => parse_usize("n", &v)?,
        None => return Err(Error::Config("missing required field: n".into())),
    };
    let replications = match top.remove("replications") {
        Some(v) => parse_usize("replications", &v)?,
        None => 100,
    };
    let base_seed = match top.remove("base_seed") {
        Some(v) => v
            .parse::<u64>()
            .map_err(|_| Error::Config(format!("base_seed: not an integer: {v}")))?,
        None => DEFAULT_SEED,
    };
    let epsilon = match top.remove("epsilon") {
        Some(v) => parse_f64("epsilon", &v)?,
        None => 0.0,
    };
    let k_grid = match top.remove("k_grid") {
        Some(v) => parse_k_grid(&v)?,
        None => (1..=15).map(|i| 20 * i).collect(),
    };
    let alpha_set = match top.remove("alpha_set") {
        Some(v) => parse_f64_list("alpha_set", &v)?,
        None => vec![0.0, 0.3, 0.5, 1.0],
    };
    let estimators = match top.remove("estimators") {
        Some(v) => v
            .split(',')
            .map(|s| s.trim().parse::<EstimatorKind>())
            .collect::<Result<Vec<_>>>()?,
        None => {
            if base.true_tail_index() > 0.0 {
                vec![
                    EstimatorKind::Hill,
                    EstimatorKind::Mb,
                    EstimatorKind::MdpdeEr,
                    EstimatorKind::MdpdeKl,
                ]
            } else {
                vec![EstimatorKind::Mb, EstimatorKind::MdpdeEr]
            }
        }
    };
    if let Some(unknown) = top.keys().next() {
        return Err(Error::Config(format!("unknown field: {unknown}")));
    }

    let mixture = MixtureSpec {
        base,
        contaminant,
        epsilon,
    };
    Ok(Scenario {
        name,
        mixture,
        n,
        replications,
        k_grid,
        alpha_set,
        estimators,
        base_seed,
    })
}

fn parse_usize(field: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| Error::Config(format!("{field}: not a count: {v}")))
}

fn parse_f64(field: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| Error::Config(format!("{field}: not a number: {v}")))
}

fn parse_f64_list(field: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse_f64(field, s.trim())).collect()
}

fn parse_k_grid(v: &str) -> Result<Vec<usize>> {
    if v.contains(':') {
        let parts: Vec<&str> = v.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "k_grid: range must be lo:hi:step, got {v}"
            )));
        }
        let lo = parse_usize("k_grid", parts[0].trim())?;
        let hi = parse_usize("k_grid", parts[1].trim())?;
        let step = parse_usize("k_grid", parts[2].trim())?;
        if step == 0 || hi < lo {
            return Err(Error::Config(format!("k_grid: bad range {v}")));
        }
        Ok((lo..=hi).step_by(step).collect())
    } else {
        v.split(',')
            .map(|s| parse_usize("k_grid", s.trim()))
            .collect()
    }
}

fn take_num(
    kv: &mut BTreeMap<String, String>,
    label: &str,
    family: &str,
    key: &str,
) -> Result<f64> {
    let v = kv
        .remove(key)
        .ok_or_else(|| Error::Config(format!("{label}.{family}: missing field: {key}")))?;
    parse_f64(&format!("{label}.{key}"), &v)
}

/// Like `take_num`, but the stock simulation settings fill in for omitted
/// parameters where a conventional value exists.
fn take_num_or(
    kv: &mut BTreeMap<String, String>,
    label: &str,
    key: &str,
    default: f64,
) -> Result<f64> {
    match kv.remove(key) {
        Some(v) => parse_f64(&format!("{label}.{key}"), &v),
        None => Ok(default),
    }
}

fn family_from_kv(kv: &BTreeMap<String, String>, label: &str) -> Result<DistributionSpec> {
    let mut kv = kv.clone();
    let family = kv
        .remove("family")
        .ok_or_else(|| Error::Config(format!("{label}: missing required field: family")))?;
    let spec = match family.as_str() {
        "student_t" => DistributionSpec::student_t(take_num(&mut kv, label, &family, "nu")?)?,
        "burr" => DistributionSpec::burr(
            take_num(&mut kv, label, &family, "beta")?,
            take_num(&mut kv, label, &family, "tau")?,
            take_num(&mut kv, label, &family, "lambda")?,
        )?,
        "frechet" => DistributionSpec::frechet(take_num(&mut kv, label, &family, "gamma")?)?,
        "log_normal" | "lognormal" => DistributionSpec::log_normal(),
        "weibull" => DistributionSpec::weibull(
            take_num_or(&mut kv, label, "lambda", 1.0)?,
            take_num_or(&mut kv, label, "tau", 2.0)?,
        )?,
        "uniform01" | "uniform" => DistributionSpec::uniform01(),
        "reversed_burr" => DistributionSpec::reversed_burr(
            take_num(&mut kv, label, &family, "beta")?,
            take_num(&mut kv, label, &family, "tau")?,
            take_num(&mut kv, label, &family, "lambda")?,
            take_num_or(&mut kv, label, "x_plus", 2.0)?,
        )?,
        other => return Err(Error::Config(format!("{label}: unknown family: {other}"))),
    };
    if let Some(unknown) = kv.keys().next() {
        return Err(Error::Config(format!("{label}: unknown field: {unknown}")));
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# heavy contamination run
name = t2_heavy
n = 500
replications = 50
base_seed = 9
epsilon = 0.15
k_grid = 100, 200
alpha_set = 0, 0.3
estimators = mb, mdpde_er

base {
    family = student_t
    nu = 2
}

contaminant {
    family = student_t
    nu = 0.3333333333333333
}
";

    #[test]
    fn parses_the_flat_format() {
        let s = parse_scenario(SAMPLE).unwrap();
        assert_eq!(s.name, "t2_heavy");
        assert_eq!(s.n, 500);
        assert_eq!(s.replications, 50);
        assert_eq!(s.mixture.epsilon, 0.15);
        assert_eq!(s.k_grid, vec![100, 200]);
        assert_eq!(s.alpha_set, vec![0.0, 0.3]);
        assert_eq!(
            s.estimators,
            vec![EstimatorKind::Mb, EstimatorKind::MdpdeEr]
        );
        assert_eq!(s.mixture.base, DistributionSpec::student_t(2.0).unwrap());
    }

    #[test]
    fn missing_n_names_the_field() {
        let text = "base {\n family = uniform01\n}\n";
        let err = parse_scenario(text).unwrap_err().to_string();
        assert!(err.contains("n"), "{err}");
    }

    #[test]
    fn k_grid_range_syntax() {
        assert_eq!(parse_k_grid("20:100:40").unwrap(), vec![20, 60, 100]);
        assert!(parse_k_grid("20:100:0").is_err());
    }

    #[test]
    fn json_round_trip_is_exact() {
        for s in crate::sim::builtin_scenarios() {
            let json = scenario_to_json(&s);
            let back = parse_scenario(&json).unwrap();
            assert_eq!(s, back);
        }
    }

    #[test]
    fn text_round_trip_is_exact() {
        for s in crate::sim::builtin_scenarios() {
            let text = scenario_to_text(&s);
            let back = parse_scenario(&text).unwrap();
            assert_eq!(s, back);
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = format!("{SAMPLE}\nbogus = 3\n");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn epsilon_without_contaminant_is_rejected() {
        let text = "n = 100\nepsilon = 0.05\nbase {\n family = uniform01\n}\n";
        assert!(parse_scenario(text).is_err());
    }

    #[test]
    fn stock_parameter_defaults_fill_in() {
        let text = "n = 500\nbase {\n family = weibull\n}\n";
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.mixture.base, DistributionSpec::weibull(1.0, 2.0).unwrap());
        let text =
            "n = 500\nbase {\n family = reversed_burr\n beta = 1\n tau = 1\n lambda = 1\n}\n";
        let s = parse_scenario(text).unwrap();
        assert_eq!(
            s.mixture.base,
            DistributionSpec::reversed_burr(1.0, 1.0, 1.0, 2.0).unwrap()
        );
    }
}
