//! Command-line front end.
//!
//! Every command takes a config path or a built-in scenario name. JSON
//! results are echoed to stdout; with `--out DIR` artifacts are also
//! written there (`trajectory.csv`, `fundamental.csv`, `representation.json`,
//! `certificate.json`, `rate.json`, `scenario.json`). Without `--out`, CSV
//! goes to stdout.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{load_spec, ConfigError};
use crate::error::Error;
use crate::integrator::{fundamental_grid, solve, uniform_grid, StepControl};
use crate::linalg::mat_norm;
use crate::output::{fmt_e, to_json};
use crate::representation::representation_residual;
use crate::scenario::{self, Scenario};
use crate::stability::{certify, default_window, estimate_rate, gronwall_bound};
use crate::system::SystemSpec;

pub mod exit {
    pub const OK: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const NOT_CERTIFIED: i32 = 2;
    pub const UNREADABLE_CONFIG: i32 = 3;
    pub const SCHEMA: i32 = 4;
    pub const INVALID_SYSTEM: i32 = 5;
    pub const NUMERICAL: i32 = 6;
    pub const SCENARIO_MISMATCH: i32 = 7;
}

#[derive(Debug, Parser)]
#[command(
    name = "impdde",
    version,
    about = "Linear impulsive delay differential equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Base step size.
    #[arg(long, global = true)]
    pub dt: Option<f64>,

    /// Override the horizon of the system.
    #[arg(long, global = true)]
    pub horizon: Option<f64>,

    /// Directory for artifacts (created if missing).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Grids {
    /// Initial times `a:b:step`.
    #[arg(long, value_parser = parse_grid)]
    pub s_grid: Option<Grid>,

    /// Evaluation times `a:b:step`.
    #[arg(long, value_parser = parse_grid)]
    pub t_grid: Option<Grid>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve on [0, horizon]; writes trajectory.csv.
    Simulate { spec: String },
    /// X(t, s) on a grid with its a priori envelope; writes fundamental.csv.
    Fundamental {
        spec: String,
        #[command(flatten)]
        grids: Grids,
        /// Use prod |B| instead of prod (1 + |B|) in the envelope.
        #[arg(long)]
        tight: bool,
    },
    /// Compare the variation-of-constants formula with a direct solve.
    VerifyRepresentation {
        spec: String,
        /// Target times `a:b:step`.
        #[arg(long, value_parser = parse_grid)]
        t_grid: Option<Grid>,
    },
    /// Coefficient stability test; exit 0 certified, 2 not certified.
    Certify { spec: String },
    /// Fit N e^{-nu (t - s)} to |X(t, s)|.
    EstimateRate {
        spec: String,
        #[command(flatten)]
        grids: Grids,
        /// Fit window on t - s, `tmin:tmax`.
        #[arg(long, value_parser = parse_window)]
        window: Option<[f64; 2]>,
    },
    /// Run a scenario (built-in name or file) against its stored expectations.
    Scenario { name: String },
}

/// Points `a, a + step, ..., b` from `a:b:step`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

pub fn parse_grid(text: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [a, b, step] = parts.as_slice() else {
        return Err(format!("expected a:b:step, got `{text}`"));
    };
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    uniform_grid(num(a)?, num(b)?, num(step)?)
        .map(Grid)
        .map_err(|e| e.to_string())
}

pub fn parse_window(text: &str) -> Result<[f64; 2], String> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| format!("expected tmin:tmax, got `{text}`"))?;
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    let (a, b) = (num(a)?, num(b)?);
    if !(a <= b) {
        return Err(format!("empty window {a}:{b}"));
    }
    Ok([a, b])
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match &err {
            Error::Config(ConfigError::Io { .. }) => exit::UNREADABLE_CONFIG,
            Error::Config(_) => exit::SCHEMA,
            Error::InvalidSystem(_) => exit::INVALID_SYSTEM,
            Error::Numerical(_) => exit::NUMERICAL,
            _ => exit::ERROR,
        };
        let message = match &err {
            Error::InvalidSystem(violations) => {
                let mut m = String::from("system violates its hypotheses:");
                for v in violations {
                    m.push_str(&format!("\n  {v}"));
                }
                m
            }
            other => other.to_string(),
        };
        Failure { code, message }
    }
}

impl From<ConfigError> for Failure {
    fn from(err: ConfigError) -> Self {
        Error::from(err).into()
    }
}

fn io_failure(path: &Path, err: std::io::Error) -> Failure {
    Failure {
        code: exit::ERROR,
        message: format!("cannot write {}: {err}", path.display()),
    }
}

/// Config file, or a built-in scenario's system when no such file exists.
fn resolve_spec(arg: &str, common: &Common) -> Result<SystemSpec, Failure> {
    let mut spec = if !Path::new(arg).exists() {
        match scenario::builtin(arg) {
            Some(scn) => scn.spec,
            None => load_spec(arg)?,
        }
    } else {
        load_spec(arg)?
    };
    if let Some(h) = common.horizon {
        spec.horizon = h;
    }
    log::info!(
        "{arg}: dim {}, {} delay terms, {} jumps on [0, {}]",
        spec.dim,
        spec.terms.len(),
        spec.impulse_events().len(),
        spec.horizon
    );
    Ok(spec)
}

fn control(common: &Common, default: f64) -> Result<StepControl, Failure> {
    Ok(StepControl::new(common.dt.unwrap_or(default))?)
}

/// Collected outputs of one command, written only after everything succeeded.
struct Artifacts {
    out: Option<PathBuf>,
    files: Vec<(&'static str, String)>,
}

impl Artifacts {
    fn new(out: Option<PathBuf>) -> Self {
        Self {
            out,
            files: Vec::new(),
        }
    }

    fn csv(&mut self, name: &'static str, body: String) {
        self.files.push((name, body));
    }

    fn json(&mut self, name: &'static str, body: String) {
        self.files.push((name, body));
    }

    fn flush(self, stdout: &mut String) -> Result<(), Failure> {
        if let Some(dir) = &self.out {
            fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
            for (name, body) in &self.files {
                let path = dir.join(name);
                fs::write(&path, body).map_err(|e| io_failure(&path, e))?;
            }
        }
        for (name, body) in self.files {
            if name.ends_with(".json") || self.out.is_none() {
                stdout.push_str(&body);
            }
        }
        Ok(())
    }
}

fn default_grid(spec: &SystemSpec, fraction: f64, points: f64) -> Result<Vec<f64>, Failure> {
    let end = spec.horizon * fraction;
    Ok(uniform_grid(0.0, end, end / points)?)
}

fn fundamental_csv(
    spec: &SystemSpec,
    s_grid: &[f64],
    t_grid: &[f64],
    ctl: &StepControl,
    tight: bool,
) -> Result<String, Failure> {
    let fm = fundamental_grid(spec, s_grid, t_grid, ctl)?;
    let n = spec.dim;
    let mut out = String::from("t,s");
    for i in 1..=n {
        for j in 1..=n {
            out.push_str(&format!(",X{i}{j}"));
        }
    }
    out.push_str(",norm,gronwall_bound\n");
    let mut inapplicable = false;
    for (t, s, x) in fm.pairs() {
        out.push_str(&fmt_e(t));
        out.push(',');
        out.push_str(&fmt_e(s));
        for i in 0..n {
            for j in 0..n {
                out.push(',');
                out.push_str(&fmt_e(x[(i, j)]));
            }
        }
        let bound = if t >= s {
            match gronwall_bound(spec, s, t, tight) {
                Ok(b) => b,
                Err(Error::BoundInapplicable(_)) => {
                    inapplicable = true;
                    f64::NAN
                }
                Err(e) => return Err(e.into()),
            }
        } else {
            f64::NAN
        };
        out.push_str(&format!(",{},{}\n", fmt_e(mat_norm(x)), fmt_e(bound)));
    }
    if inapplicable {
        log::warn!("tight envelope undefined where a jump matrix vanishes; written as nan");
    }
    Ok(out)
}

fn execute(cli: Cli, stdout: &mut String) -> Result<i32, Failure> {
    let common = &cli.common;
    let mut artifacts = Artifacts::new(common.out.clone());
    let mut code = exit::OK;
    match &cli.command {
        Command::Simulate { spec } => {
            let spec = resolve_spec(spec, common)?;
            let traj = solve(&spec, &control(common, 1e-3)?)?;
            artifacts.csv("trajectory.csv", traj.to_csv());
        }
        Command::Fundamental { spec, grids, tight } => {
            let spec = resolve_spec(spec, common)?;
            let s_grid = match &grids.s_grid {
                Some(g) => g.0.clone(),
                None => default_grid(&spec, 1.0, 20.0)?,
            };
            let t_grid = match &grids.t_grid {
                Some(g) => g.0.clone(),
                None => default_grid(&spec, 1.0, 20.0)?,
            };
            let csv = fundamental_csv(&spec, &s_grid, &t_grid, &control(common, 1e-3)?, *tight)?;
            artifacts.csv("fundamental.csv", csv);
        }
        Command::VerifyRepresentation { spec, t_grid } => {
            let spec = resolve_spec(spec, common)?;
            let targets = match t_grid {
                Some(g) => g.0.clone(),
                None => uniform_grid(0.0, spec.horizon.min(2.0), 0.5)?,
            };
            let report = representation_residual(&spec, &targets, &control(common, 1e-3)?)?;
            artifacts.json("representation.json", to_json(&report));
        }
        Command::Certify { spec } => {
            let spec = resolve_spec(spec, common)?;
            let cert = certify(&spec);
            if !cert.is_certified() {
                code = exit::NOT_CERTIFIED;
                for reason in &cert.reasons {
                    eprintln!("not certified: {reason}");
                }
            }
            artifacts.json("certificate.json", to_json(&cert));
        }
        Command::EstimateRate {
            spec,
            grids,
            window,
        } => {
            let spec = resolve_spec(spec, common)?;
            let s_grid = match &grids.s_grid {
                Some(g) => g.0.clone(),
                None => default_grid(&spec, 0.5, 10.0)?,
            };
            let t_grid = match &grids.t_grid {
                Some(g) => g.0.clone(),
                None => default_grid(&spec, 1.0, 40.0)?,
            };
            let fm = fundamental_grid(&spec, &s_grid, &t_grid, &control(common, 1e-3)?)?;
            let window = window.unwrap_or_else(|| default_window(&fm, certify(&spec).rho));
            let est = estimate_rate(&fm, window)?;
            // nu <= 0 is reported as a warning by the fit itself
            artifacts.json("rate.json", to_json(&est));
        }
        Command::Scenario { name } => {
            let scn = if Path::new(name).exists() {
                let text = fs::read_to_string(name).map_err(|source| ConfigError::Io {
                    path: name.clone(),
                    source,
                })?;
                Scenario::parse(&text)?
            } else {
                scenario::builtin(name).ok_or_else(|| Failure {
                    code: exit::UNREADABLE_CONFIG,
                    message: format!(
                        "`{name}` is neither a file nor a built-in scenario ({})",
                        scenario::builtin_names().join(", ")
                    ),
                })?
            };
            let mut spec = scn.spec.clone();
            if let Some(h) = common.horizon {
                spec.horizon = h;
            }
            let ctl = control(common, scn.dt)?;
            let report = scenario::run_checks(&scn.name, &spec, &ctl, &scn.checks)?;
            for check in &report.checks {
                eprintln!(
                    "[{}] {}: {}",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.kind,
                    check.detail
                );
            }
            if !report.passed {
                code = exit::SCENARIO_MISMATCH;
            }
            artifacts.json("scenario.json", to_json(&report));
        }
    }
    artifacts.flush(stdout)?;
    Ok(code)
}

/// Parse arguments, run, print, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                exit::ERROR
            } else {
                exit::OK
            };
        }
    };
    let mut stdout = String::new();
    match execute(cli, &mut stdout) {
        Ok(code) => {
            print!("{stdout}");
            code
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_window_syntax() {
        assert_eq!(
            parse_grid("0:1:0.25").unwrap().0,
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("1:0:0.1").is_err());
        assert_eq!(parse_window("2:8").unwrap(), [2.0, 8.0]);
        assert!(parse_window("8:2").is_err());
    }

    #[test]
    fn error_classes_map_to_codes() {
        let io: Failure = Error::Config(ConfigError::Io {
            path: "x".into(),
            source: std::io::Error::from(std::io::ErrorKind::NotFound),
        })
        .into();
        assert_eq!(io.code, exit::UNREADABLE_CONFIG);
        let schema: Failure = Error::Config(ConfigError::Schema {
            field: "dim".into(),
            message: "m".into(),
        })
        .into();
        assert_eq!(schema.code, exit::SCHEMA);
        assert_eq!(
            Failure::from(Error::Numerical("nan".into())).code,
            exit::NUMERICAL
        );
        assert_eq!(
            Failure::from(Error::InvalidSystem(vec![])).code,
            exit::INVALID_SYSTEM
        );
        assert_eq!(Failure::from(Error::Argument("a".into())).code, exit::ERROR);
    }

    #[test]
    fn certify_builtin_exit_codes() {
        let mut out = String::new();
        let cli = Cli::try_parse_from(["impdde", "certify", "paper-sec5-stabilize"]).unwrap();
        assert_eq!(execute(cli, &mut out).unwrap(), exit::OK);
        assert!(out.contains("\"verdict\": \"Certified\""));
        let cli = Cli::try_parse_from(["impdde", "certify", "paper-sec2-destabilize"]).unwrap();
        assert_eq!(
            execute(cli, &mut String::new()).unwrap(),
            exit::NOT_CERTIFIED
        );
    }
}
