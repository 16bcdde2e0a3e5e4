//! TOML run configuration for the sweep command.
//!
//! The file carries one `[sweep]` table; every field is optional and
//! falls back to the benchmark defaults. Parameters may be written as
//! plain numbers or as exact dyadic strings (`"2^-10"`, see
//! [`crate::dyadic`]). Precedence is flags over file over defaults.
//!
//! ```toml
//! [sweep]
//! eps_set = ["2^0", "2^-2", "2^-4"]
//! mu_set = ["2^-4"]
//! n_set = [64, 128, 256]
//! n_fine = 8192
//! problem = "benchmark"
//! # or an inline constant-coefficient problem:
//! # problem = { a = 1.0, b = 2.0, f = 1.0, u0 = 0.0, u1 = 0.0 }
//! ```

use std::fs;
use std::path::Path;

use serde::Deserialize;
use shishkin::experiments::{ProblemSpec, SweepConfig};

use crate::dyadic;
use crate::Failure;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    sweep: Option<SweepSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepSection {
    eps_set: Option<Vec<ParamValue>>,
    mu_set: Option<Vec<ParamValue>>,
    n_set: Option<Vec<usize>>,
    n_fine: Option<usize>,
    problem: Option<ProblemValue>,
}

/// A parameter written either as a TOML number or as a dyadic string.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ParamValue {
    Number(f64),
    Dyadic(String),
}

impl ParamValue {
    fn resolve(&self) -> Result<f64, String> {
        match self {
            ParamValue::Number(v) => Ok(*v),
            ParamValue::Dyadic(text) => dyadic::parse_value(text),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ProblemValue {
    Builtin(String),
    Constant {
        a: f64,
        b: f64,
        f: f64,
        u0: f64,
        u1: f64,
    },
}

/// Command-line overrides applied on top of the file values.
#[derive(Debug, Default)]
pub struct Overrides {
    pub n_fine: Option<usize>,
    pub problem: Option<String>,
}

/// Resolves the sweep configuration: defaults, then the config file (if
/// any), then flag overrides. Validation is left to the sweep itself so
/// the rules live in one place.
pub fn load_sweep(path: Option<&Path>, overrides: &Overrides) -> Result<SweepConfig<f64>, Failure> {
    let mut config = SweepConfig::benchmark_defaults();
    if let Some(path) = path {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        let file: ConfigFile = toml::from_str(&text)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        if let Some(sweep) = file.sweep {
            if let Some(values) = sweep.eps_set {
                config.eps_set = resolve_all(&values, "eps_set")?;
            }
            if let Some(values) = sweep.mu_set {
                config.mu_set = resolve_all(&values, "mu_set")?;
            }
            if let Some(n_set) = sweep.n_set {
                config.n_set = n_set;
            }
            if let Some(n_fine) = sweep.n_fine {
                config.n_fine = n_fine;
            }
            if let Some(problem) = sweep.problem {
                config.problem = match problem {
                    ProblemValue::Builtin(name) => ProblemSpec::Builtin(name),
                    ProblemValue::Constant { a, b, f, u0, u1 } => {
                        ProblemSpec::Constant { a, b, f, u0, u1 }
                    }
                };
            }
        }
    }
    if let Some(n_fine) = overrides.n_fine {
        config.n_fine = n_fine;
    }
    if let Some(name) = &overrides.problem {
        config.problem = ProblemSpec::Builtin(name.clone());
    }
    Ok(config)
}

fn resolve_all(values: &[ParamValue], field: &str) -> Result<Vec<f64>, Failure> {
    values
        .iter()
        .map(|v| {
            v.resolve()
                .map_err(|e| Failure::Config(format!("{field}: {e}")))
        })
        .collect()
}

/// Short display form of the configured problem.
pub fn problem_label(spec: &ProblemSpec<f64>) -> String {
    match spec {
        ProblemSpec::Builtin(name) => name.clone(),
        ProblemSpec::Constant { a, b, f, .. } => format!("constant(a = {a}, b = {b}, f = {f})"),
    }
}
