//! Scripted regression scenarios: a system, a step size and a list of
//! expectations, all stored as JSON data.
//!
//! The built-in scenarios live in `scenarios/*.json` and are compiled in.

use serde::{Deserialize, Serialize};

use crate::config::{config_from_value, parse_json, ConfigError};
use crate::error::{Error, Result};
use crate::integrator::{fundamental_grid, solve, uniform_grid, StepControl};
use crate::stability::{certify, default_window, estimate_rate, Verdict};
use crate::system::SystemSpec;

const BUILTIN: &[(&str, &str)] = &[
    (
        "paper-sec2-destabilize",
        include_str!("../scenarios/paper-sec2-destabilize.json"),
    ),
    (
        "paper-sec4-frozen",
        include_str!("../scenarios/paper-sec4-frozen.json"),
    ),
    (
        "paper-sec5-stabilize",
        include_str!("../scenarios/paper-sec5-stabilize.json"),
    ),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(name, _)| *name).collect()
}

/// Parse a built-in scenario by name.
pub fn builtin(name: &str) -> Option<Scenario> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| Scenario::parse(text).expect("built-in scenario parses"))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRange {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl GridRange {
    pub fn points(&self) -> Result<Vec<f64>> {
        uniform_grid(self.from, self.to, self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
}

/// One expectation. Sampled checks use `samples` equally spaced points of `[from, to)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Check {
    /// `|x_c(t) - value| <= tol`.
    Constant {
        from: f64,
        to: f64,
        samples: usize,
        value: f64,
        tol: f64,
        #[serde(default)]
        component: usize,
    },
    /// `|x(t)| >= intercept + slope (t - from)`, no slack.
    AbsLowerLinear {
        from: f64,
        to: f64,
        samples: usize,
        intercept: f64,
        slope: f64,
    },
    /// `|x|` strictly increasing along `times`.
    AbsIncreasing { times: Vec<f64> },
    /// Certificate verdict and optionally its left-hand side.
    Certificate {
        verdict: Verdict,
        #[serde(default)]
        lhs: Option<f64>,
        #[serde(default)]
        tol: Option<f64>,
    },
    /// Sign of the fitted decay rate of `|X(t, s)|`.
    RateSign {
        sign: Sign,
        s_grid: GridRange,
        t_grid: GridRange,
        #[serde(default)]
        window: Option<[f64; 2]>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    parameters: serde_json::Value,
    system: serde_json::Value,
    dt: f64,
    checks: Vec<Check>,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    /// Free-form record of the parameter values chosen for the system family.
    pub parameters: serde_json::Value,
    pub spec: SystemSpec,
    pub dt: f64,
    pub checks: Vec<Check>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw: RawScenario = parse_json(text)?;
        let spec = config_from_value(&raw.system)
            .map_err(|e| prefix_field(e, "system"))?
            .to_spec()
            .map_err(|e| prefix_field(e, "system"))?;
        Ok(Self {
            name: raw.name,
            description: raw.description,
            parameters: raw.parameters,
            spec,
            dt: raw.dt,
            checks: raw.checks,
        })
    }
}

fn prefix_field(err: ConfigError, prefix: &str) -> ConfigError {
    match err {
        ConfigError::Schema { field, message } => ConfigError::Schema {
            field: format!("{prefix}.{field}"),
            message,
        },
        ConfigError::Parse { field, message, .. } => ConfigError::Schema {
            field: format!("{prefix}.{field}"),
            message,
        },
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub kind: String,
    pub passed: bool,
    pub detail: String,
    /// Check-specific figure of merit (worst deviation, smallest margin, fitted rate, ...).
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub dt: f64,
    pub horizon: f64,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

fn sample_points(from: f64, to: f64, samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|k| from + (to - from) * k as f64 / samples as f64)
        .collect()
}

/// Run every check of a scenario (with `spec` possibly overridden by the caller).
pub fn run_checks(
    name: &str,
    spec: &SystemSpec,
    control: &StepControl,
    checks: &[Check],
) -> Result<ScenarioReport> {
    let traj = solve(spec, control)?;
    let norm_at = |t: f64| -> Result<f64> { Ok(crate::linalg::vec_norm(&traj.evaluate(t)?)) };
    let mut outcomes = Vec::new();
    for check in checks {
        let outcome = match check {
            Check::Constant {
                from,
                to,
                samples,
                value,
                tol,
                component,
            } => {
                if *component >= spec.dim {
                    return Err(Error::Argument(format!(
                        "component {component} out of range"
                    )));
                }
                let mut worst = 0.0f64;
                for t in sample_points(*from, *to, *samples) {
                    worst = worst.max((traj.evaluate(t)?[*component] - value).abs());
                }
                CheckOutcome {
                    kind: "constant".into(),
                    passed: worst <= *tol,
                    detail: format!(
                        "max |x{} - {value}| on [{from}, {to}) = {worst:.3e} (tol {tol:.1e})",
                        component + 1
                    ),
                    observed: worst,
                }
            }
            Check::AbsLowerLinear {
                from,
                to,
                samples,
                intercept,
                slope,
            } => {
                let mut margin = f64::INFINITY;
                let mut at = *from;
                for t in sample_points(*from, *to, *samples) {
                    let m = norm_at(t)? - (intercept + slope * (t - from));
                    if m < margin {
                        margin = m;
                        at = t;
                    }
                }
                CheckOutcome {
                    kind: "abs_lower_linear".into(),
                    passed: margin >= 0.0,
                    detail: format!(
                        "min(|x| - ({intercept} + {slope}(t - {from}))) on [{from}, {to}) = {margin:.3e} at t = {at}"
                    ),
                    observed: margin,
                }
            }
            Check::AbsIncreasing { times } => {
                let values = times
                    .iter()
                    .map(|&t| norm_at(t))
                    .collect::<Result<Vec<_>>>()?;
                let ok = values.windows(2).all(|w| w[1] > w[0]);
                let min_step = values
                    .windows(2)
                    .map(|w| w[1] - w[0])
                    .fold(f64::INFINITY, f64::min);
                CheckOutcome {
                    kind: "abs_increasing".into(),
                    passed: ok,
                    detail: format!(
                        "|x| at {} sample times, smallest increment {min_step:.3e}",
                        times.len()
                    ),
                    observed: min_step,
                }
            }
            Check::Certificate { verdict, lhs, tol } => {
                let cert = certify(spec);
                let mut passed = cert.verdict == *verdict;
                let mut detail = format!("verdict {:?} (expected {verdict:?})", cert.verdict);
                let observed = cert.lhs.unwrap_or(f64::NAN);
                if let Some(expected) = lhs {
                    let tol = tol.unwrap_or(1e-6);
                    passed &= (observed - expected).abs() <= tol;
                    detail.push_str(&format!(
                        ", lhs = {observed:.9} (expected {expected} within {tol:.1e})"
                    ));
                }
                CheckOutcome {
                    kind: "certificate".into(),
                    passed,
                    detail,
                    observed,
                }
            }
            Check::RateSign {
                sign,
                s_grid,
                t_grid,
                window,
            } => {
                let fm = fundamental_grid(spec, &s_grid.points()?, &t_grid.points()?, control)?;
                let window = window.unwrap_or_else(|| default_window(&fm, certify(spec).rho));
                let est = estimate_rate(&fm, window)?;
                let passed = match sign {
                    Sign::Positive => est.nu > 0.0,
                    Sign::Negative => est.nu < 0.0,
                };
                CheckOutcome {
                    kind: "rate_sign".into(),
                    passed,
                    detail: format!(
                        "nu = {:.6} over {} samples in [{}, {}] (expected {sign:?})",
                        est.nu, est.n_samples, window[0], window[1]
                    ),
                    observed: est.nu,
                }
            }
        };
        outcomes.push(outcome);
    }
    Ok(ScenarioReport {
        name: name.to_string(),
        dt: control.dt,
        horizon: spec.horizon,
        passed: outcomes.iter().all(|o| o.passed),
        checks: outcomes,
    })
}

pub fn run(scenario: &Scenario) -> Result<ScenarioReport> {
    let control = StepControl::new(scenario.dt)?;
    run_checks(&scenario.name, &scenario.spec, &control, &scenario.checks)
}
