//! Command-line front end: estimation on plain number files, the scenario
//! simulator, influence and sensitivity tables, and asymptotic variance
//! tables, as CSV or JSON.
//!
//! Exit codes: 0 success, 1 input or configuration error, 2 solver
//! non-convergence. The `TAILIX_SEED` environment variable supplies a
//! default seed; an explicit `--seed` wins.

use clap::{Parser, Subcommand, ValueEnum};
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{parse_scenario, scenario_to_json};
use crate::error::{Error, Result};
use crate::estimators::{estimate_from_sample, DpdConfig, EstimateResult, EstimatorKind};
use crate::numfmt::sig12;
use crate::robustness::{gross_error_sensitivity, if_single};
use crate::sim::{builtin_scenarios, run_scenario, write_summary_csv, Scenario};

#[derive(Parser)]
#[command(
    name = "tailix",
    version,
    about = "Tail-index estimation with robust divergence fits"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum J0Rule {
    /// j0 = k/2
    Half,
    /// j0 = k/5
    Fifth,
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the tail index from a file of newline-separated numbers.
    Estimate {
        /// Input file, one decimal observation per line.
        #[arg(long)]
        input: PathBuf,
        /// One of: hill, mb, mdpde_er, mdpde_kl.
        #[arg(long, default_value = "mdpde_er")]
        estimator: String,
        /// Divergence tuning parameter.
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        /// Number of extreme order statistics.
        #[arg(long, default_value_t = 225)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run a replicated sampling experiment and write the summary table.
    Simulate {
        /// Scenario config file (flat text or JSON).
        #[arg(long, conflicts_with = "named")]
        scenario: Option<PathBuf>,
        /// Name of a built-in scenario (see `tailix scenarios`).
        #[arg(long)]
        named: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Override the scenario's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the scenario's replication count.
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Influence-function curve over the contamination point.
    Influence {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, default_value_t = 0.3)]
        alpha: f64,
        #[arg(long, default_value_t = 225)]
        k: usize,
        /// Contamination direction; defaults to k/2.
        #[arg(long)]
        j0: Option<usize>,
        /// Largest contamination point on the log-spaced grid.
        #[arg(long, default_value_t = 1e3)]
        t0_max: f64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Gross-error sensitivity surface over (k, alpha).
    Sensitivity {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        gamma: f64,
        /// Contamination direction as a fraction of k.
        #[arg(long, value_enum, default_value_t = J0Rule::Half)]
        j0_rule: J0Rule,
        /// Comma-separated k values.
        #[arg(long, default_value = "50,100,150,200,250,300")]
        k_list: String,
        /// Comma-separated alpha values.
        #[arg(long, default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")]
        alpha_list: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Asymptotic variance table over (gamma, alpha).
    Asymvar {
        /// Comma-separated gamma values.
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        gamma: String,
        /// Comma-separated alpha values.
        #[arg(long, default_value = "0.3")]
        alpha: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// List the built-in scenario catalog.
    Scenarios {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

/// Entry point used by the binary.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Testable entry point.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::NonConvergence => 2,
                _ => 1,
            }
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Cmd::Estimate {
            input,
            estimator,
            alpha,
            k,
            out,
            format,
        } => cmd_estimate(&input, &estimator, alpha, k, out.as_deref(), format),
        Cmd::Simulate {
            scenario,
            named,
            out,
            format,
            seed,
            reps,
        } => cmd_simulate(
            scenario.as_deref(),
            named.as_deref(),
            out.as_deref(),
            format,
            seed,
            reps,
        ),
        Cmd::Influence {
            gamma,
            alpha,
            k,
            j0,
            t0_max,
            points,
            out,
            format,
        } => cmd_influence(gamma, alpha, k, j0, t0_max, points, out.as_deref(), format),
        Cmd::Sensitivity {
            gamma,
            j0_rule,
            k_list,
            alpha_list,
            out,
            format,
        } => cmd_sensitivity(gamma, j0_rule, &k_list, &alpha_list, out.as_deref(), format),
        Cmd::Asymvar {
            gamma,
            alpha,
            out,
            format,
        } => cmd_asymvar(&gamma, &alpha, out.as_deref(), format),
        Cmd::Scenarios { out, format } => cmd_scenarios(out.as_deref(), format),
    }
}

fn read_observations(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut xs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t.parse().map_err(|_| {
            Error::Config(format!("{}:{}: not a number: {t}", path.display(), i + 1))
        })?;
        xs.push(v);
    }
    if xs.is_empty() {
        return Err(Error::Config(format!(
            "{}: no observations",
            path.display()
        )));
    }
    Ok(xs)
}

fn write_out(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn estimate_json(r: &EstimateResult) -> String {
    serde_json::json!({
        "estimator": r.estimator.tag(),
        "gamma_hat": r.gamma_hat,
        "objective": r.objective_at_solution,
        "converged": r.converged,
        "n_roots_found": r.n_roots_found,
    })
    .to_string()
}

fn cmd_estimate(
    input: &Path,
    estimator: &str,
    alpha: f64,
    k: usize,
    out: Option<&Path>,
    format: Format,
) -> Result<i32> {
    let kind: EstimatorKind = estimator.parse()?;
    let xs = read_observations(input)?;
    let cfg = DpdConfig::new(alpha, k);
    let r = estimate_from_sample(&xs, kind, &cfg)?;
    let content = match format {
        Format::Csv => format!(
            "estimator,gamma_hat,objective,converged\n{},{},{},{}\n",
            r.estimator.tag(),
            sig12(r.gamma_hat),
            sig12(r.objective_at_solution),
            r.converged
        ),
        Format::Json => format!("{}\n", estimate_json(&r)),
    };
    write_out(out, &content)?;
    Ok(if r.converged { 0 } else { 2 })
}

fn load_scenario(path: Option<&Path>, named: Option<&str>) -> Result<Scenario> {
    match (path, named) {
        (Some(p), None) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            parse_scenario(&text)
        }
        (None, Some(name)) => builtin_scenarios()
            .into_iter()
            .find(|s| s.name == name)
            .ok_or_else(|| Error::Config(format!("no built-in scenario named '{name}'"))),
        _ => Err(Error::Config(
            "exactly one of --scenario or --named is required".into(),
        )),
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("TAILIX_SEED")
        .ok()
        .and_then(|v| v.parse().ok())
}

fn cmd_simulate(
    path: Option<&Path>,
    named: Option<&str>,
    out: Option<&Path>,
    format: Format,
    seed: Option<u64>,
    reps: Option<usize>,
) -> Result<i32> {
    let mut scenario = load_scenario(path, named)?;
    if let Some(s) = seed.or_else(env_seed) {
        scenario.base_seed = s;
    }
    if let Some(r) = reps {
        scenario.replications = r;
    }
    let rows = run_scenario(&scenario)?;
    let content = match format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_summary_csv(&scenario, &rows, &mut buf)
                .map_err(|e| Error::Config(format!("write failed: {e}")))?;
            String::from_utf8(buf).expect("csv is utf-8")
        }
        Format::Json => {
            let value = serde_json::json!({ "scenario": scenario, "rows": rows });
            format!(
                "{}\n",
                serde_json::to_string_pretty(&value).expect("serializes")
            )
        }
    };
    write_out(out, &content)?;
    if out.is_some() {
        println!("{}", rows.len());
    } else {
        eprintln!("{}", rows.len());
    }
    Ok(0)
}

fn table(header: &str, rows: &[Vec<String>], format: Format, names: &[&str]) -> String {
    match format {
        Format::Csv => {
            let mut s = String::from(header);
            s.push('\n');
            for row in rows {
                s.push_str(&row.join(","));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let objs: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let map: serde_json::Map<String, serde_json::Value> = names
                        .iter()
                        .zip(row)
                        .map(|(n, v)| {
                            let val = if let Ok(i) = v.parse::<i64>() {
                                serde_json::json!(i)
                            } else if let Ok(x) = v.parse::<f64>() {
                                serde_json::json!(x)
                            } else {
                                serde_json::json!(v)
                            };
                            (n.to_string(), val)
                        })
                        .collect();
                    serde_json::Value::Object(map)
                })
                .collect();
            format!(
                "{}\n",
                serde_json::to_string_pretty(&objs).expect("serializes")
            )
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_influence(
    gamma: f64,
    alpha: f64,
    k: usize,
    j0: Option<usize>,
    t0_max: f64,
    points: usize,
    out: Option<&Path>,
    format: Format,
) -> Result<i32> {
    if alpha < 0.0 {
        return Err(Error::Config("alpha: must be >= 0".into()));
    }
    if k < 2 {
        return Err(Error::Config("k: must be >= 2".into()));
    }
    let j0 = j0.unwrap_or(k / 2).clamp(1, k - 1);
    if points < 2 || t0_max.is_nan() || t0_max <= 1e-3 {
        return Err(Error::Config("need points >= 2 and t0_max > 1e-3".into()));
    }
    let mut grid = vec![0.0];
    for i in 0..points {
        let f = i as f64 / (points - 1) as f64;
        grid.push(1e-3 * (t0_max / 1e-3).powf(f));
    }
    let rows: Vec<Vec<String>> = grid
        .iter()
        .map(|&t0| {
            vec![
                sig12(gamma),
                sig12(alpha),
                k.to_string(),
                j0.to_string(),
                sig12(t0),
                sig12(if_single(t0, j0, k, gamma, alpha)),
            ]
        })
        .collect();
    let content = table(
        "gamma,alpha,k,j0,t0,value",
        &rows,
        format,
        &["gamma", "alpha", "k", "j0", "t0", "value"],
    );
    write_out(out, &content)?;
    Ok(0)
}

fn parse_list<T: std::str::FromStr>(field: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| Error::Config(format!("{field}: cannot parse '{}'", s.trim())))
        })
        .collect()
}

fn cmd_sensitivity(
    gamma: f64,
    rule: J0Rule,
    k_list: &str,
    alpha_list: &str,
    out: Option<&Path>,
    format: Format,
) -> Result<i32> {
    let ks: Vec<usize> = parse_list("k_list", k_list)?;
    let alphas: Vec<f64> = parse_list("alpha_list", alpha_list)?;
    if ks.iter().any(|&k| k < 3) {
        return Err(Error::Config("k_list: entries must be >= 3".into()));
    }
    if alphas.iter().any(|&a| a < 0.0) {
        return Err(Error::Config("alpha_list: entries must be >= 0".into()));
    }
    let mut rows = Vec::new();
    for &k in &ks {
        let j0 = match rule {
            J0Rule::Half => k / 2,
            J0Rule::Fifth => k / 5,
        }
        .clamp(1, k - 1);
        for &alpha in &alphas {
            rows.push(vec![
                sig12(gamma),
                sig12(alpha),
                k.to_string(),
                j0.to_string(),
                String::new(),
                sig12(gross_error_sensitivity(j0, k, gamma, alpha)),
            ]);
        }
    }
    let content = table(
        "gamma,alpha,k,j0,t0,value",
        &rows,
        format,
        &["gamma", "alpha", "k", "j0", "t0", "value"],
    );
    write_out(out, &content)?;
    Ok(0)
}

fn cmd_asymvar(gamma: &str, alpha: &str, out: Option<&Path>, format: Format) -> Result<i32> {
    let gammas: Vec<f64> = parse_list("gamma", gamma)?;
    let alphas: Vec<f64> = parse_list("alpha", alpha)?;
    let mut rows = Vec::new();
    for &g in &gammas {
        for &a in &alphas {
            let v = crate::asymptotics::asymptotic_variance(g, a)?;
            rows.push(vec![
                sig12(g),
                sig12(a),
                sig12(v.a),
                sig12(v.sigma2),
                sig12(v.variance),
            ]);
        }
    }
    let content = table(
        "gamma,alpha,a,sigma2,variance",
        &rows,
        format,
        &["gamma", "alpha", "a", "sigma2", "variance"],
    );
    write_out(out, &content)?;
    Ok(0)
}

fn cmd_scenarios(out: Option<&Path>, format: Format) -> Result<i32> {
    let all = builtin_scenarios();
    let content = match format {
        Format::Csv => {
            let mut s = String::from("name,base,contaminant,epsilon,true_gamma,n,replications\n");
            for sc in &all {
                s.push_str(&format!(
                    "{},{:?},{},{},{},{},{}\n",
                    sc.name,
                    sc.mixture.base,
                    sc.mixture
                        .contaminant
                        .map(|c| format!("{c:?}"))
                        .unwrap_or_default(),
                    sig12(sc.mixture.epsilon),
                    sig12(sc.true_gamma()),
                    sc.n,
                    sc.replications
                ));
            }
            s
        }
        Format::Json => {
            let items: Vec<serde_json::Value> = all
                .iter()
                .map(|s| serde_json::from_str(&scenario_to_json(s)).expect("valid json"))
                .collect();
            format!(
                "{}\n",
                serde_json::to_string_pretty(&items).expect("serializes")
            )
        }
    };
    write_out(out, &content)?;
    Ok(0)
}
