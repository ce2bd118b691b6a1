//! Variation-of-constants representation of solutions.
//!
//! With `X(t, s)` the fundamental matrix of the `s`-curtailed equation,
//!
//! ```text
//! x(t) = int_0^t X(t,s) r(s) ds
//!        - sum_i int_0^t X(t,s) A_i(s) phi(s - theta_i) ds      (phi = 0 on [0, inf))
//!        + X(t,0) x(0) + sum_{0 < tau_j <= t} X(t,tau_j) alpha_j
//! ```
//!
//! Each integral is a composite trapezoid rule on the integrator's own
//! grid. Every cell carries constant data, so only `s -> X(t, s)` varies
//! inside it. That map jumps at every impulse time (`X(t, tau - 0) =
//! X(t, tau) B`), so impulse times are always cell boundaries.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrator::{curtailed, snap_tol, solve_with_nodes, Mode, Prepared, StepControl};
use crate::linalg::vec_norm;
use crate::profile::Profile;
use crate::system::{validate, DelayKind, Impulse, SystemSpec};

/// A system, the times at which to represent its solution, and the
/// quadrature grid on `[0, max target]`.
#[derive(Debug, Clone)]
pub struct RepresentationInput {
    pub spec: SystemSpec,
    pub quad_grid: Vec<f64>,
    pub target_times: Vec<f64>,
    pub control: StepControl,
}

impl RepresentationInput {
    /// Grid aligned with the integrator: jumps, data knots and their lag
    /// images, every target `t` and every `t - theta_i`.
    pub fn new(spec: SystemSpec, target_times: Vec<f64>, control: StepControl) -> Result<Self> {
        check_supported(&spec)?;
        check_targets(&target_times, spec.horizon)?;
        let quad_grid = aligned_grid(&spec, &target_times, &[], control.dt);
        Ok(Self {
            spec,
            quad_grid,
            target_times,
            control,
        })
    }
}

/// The three summands of the representation at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Summands {
    /// `int_0^t X(t,s) r(s) ds`.
    pub forcing: DVector<f64>,
    /// `-sum_i int_0^t X(t,s) A_i(s) phi(s - theta_i) ds`.
    pub prehistory: DVector<f64>,
    /// `X(t,0) x(0) + sum X(t,tau_j) alpha_j`.
    pub jumps: DVector<f64>,
}

impl Summands {
    pub fn total(&self) -> DVector<f64> {
        &self.forcing + &self.prehistory + &self.jumps
    }
}

/// Which one-sided value of the solution to represent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Limit {
    /// `x(t)` (right-continuous).
    Value,
    /// `x(t - 0)`.
    Left,
}

fn check_supported(spec: &SystemSpec) -> Result<()> {
    let violations = validate(spec);
    if !violations.is_empty() {
        return Err(Error::InvalidSystem(violations));
    }
    if spec.has_frozen_terms() {
        return Err(Error::Unsupported(
            "representation requires constant-lag terms; frozen arguments are not supported".into(),
        ));
    }
    Ok(())
}

fn check_targets(targets: &[f64], horizon: f64) -> Result<()> {
    if targets.is_empty() {
        return Err(Error::Argument("no target times".into()));
    }
    if targets.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument(
            "target times must be strictly increasing".into(),
        ));
    }
    if targets[0] < 0.0 || targets[targets.len() - 1] > horizon {
        return Err(Error::Domain(format!("target times leave [0, {horizon}]")));
    }
    Ok(())
}

fn lags(spec: &SystemSpec) -> Vec<f64> {
    spec.terms
        .iter()
        .filter_map(|t| match t.delay {
            DelayKind::Lag(theta) if theta > 0.0 => Some(theta),
            _ => None,
        })
        .collect()
}

fn aligned_grid(spec: &SystemSpec, targets: &[f64], knots: &[f64], dt: f64) -> Vec<f64> {
    let t_max = targets[targets.len() - 1];
    if t_max <= 0.0 {
        return vec![0.0];
    }
    let mut extra: Vec<f64> = targets.to_vec();
    for &theta in &lags(spec) {
        extra.extend(targets.iter().map(|t| t - theta).filter(|&u| u > 0.0));
        extra.push(theta);
    }
    extra.extend_from_slice(knots);
    Prepared::new(spec).step_grid(Mode::Full, 0.0, t_max, dt, &extra)
}

fn near(a: f64, b: f64) -> bool {
    (a - b).abs() <= snap_tol(b)
}

/// `(X(t_k, s), X(t_k - 0, s))` for one target `t_k`.
type KernelPair = (DMatrix<f64>, DMatrix<f64>);

/// A [`KernelPair`] for every target `t_k`, for each quadrature node `s`
/// that has been requested.
struct Kernel<'a> {
    prep: Prepared,
    targets: &'a [f64],
    dt: f64,
    n: usize,
    cache: HashMap<u64, Vec<KernelPair>>,
}

impl<'a> Kernel<'a> {
    fn new(spec: &SystemSpec, targets: &'a [f64], dt: f64) -> Self {
        Self {
            prep: Prepared::new(spec),
            targets,
            dt,
            n: spec.dim,
            cache: HashMap::new(),
        }
    }

    fn at(&mut self, s: f64) -> Result<&[(DMatrix<f64>, DMatrix<f64>)]> {
        let key = s.to_bits();
        if !self.cache.contains_key(&key) {
            let n = self.n;
            let t_end = self.targets[self.targets.len() - 1];
            let sol = if t_end > s + snap_tol(s) {
                Some(curtailed(&self.prep, s, t_end, self.dt, self.targets)?)
            } else {
                None
            };
            let mut row = Vec::with_capacity(self.targets.len());
            for &t in self.targets {
                let entry = if near(t, s) {
                    (DMatrix::identity(n, n), DMatrix::identity(n, n))
                } else if t < s {
                    (DMatrix::zeros(n, n), DMatrix::zeros(n, n))
                } else {
                    let sol = sol.as_ref().expect("solved past s");
                    (sol.at(t)?, sol.left_limit(t)?)
                };
                row.push(entry);
            }
            self.cache.insert(key, row);
        }
        Ok(&self.cache[&key])
    }
}

fn impulse_at(events: &[Impulse], u: f64) -> Option<&Impulse> {
    let idx = events.partition_point(|e| e.time < u - snap_tol(u));
    events.get(idx).filter(|e| near(e.time, u))
}

struct Evaluator<'a> {
    spec: &'a SystemSpec,
    grid: &'a [f64],
    events: Vec<Impulse>,
    kernel: Kernel<'a>,
}

impl<'a> Evaluator<'a> {
    fn new(spec: &'a SystemSpec, grid: &'a [f64], targets: &'a [f64], dt: f64) -> Self {
        let t_max = targets[targets.len() - 1];
        Self {
            spec,
            grid,
            events: spec.impulses.events(t_max),
            kernel: Kernel::new(spec, targets, dt),
        }
    }

    /// `X(t_k -/+ 0, u + 0)` and `X(t_k -/+ 0, u - 0)` at grid node `u <= t_k`.
    fn endpoints(
        &mut self,
        k: usize,
        u: f64,
        limit: Limit,
    ) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let t = self.kernel.targets[k];
        let (right, left_t) = self.kernel.at(u)?[k].clone();
        let x = match limit {
            Limit::Value => right,
            Limit::Left => left_t,
        };
        // s -> X(t, s) jumps at impulse times; at s = t the left value seen
        // from x(t - 0) carries no jump
        let below = match impulse_at(&self.events, u) {
            Some(imp) if !(limit == Limit::Left && near(u, t)) => &x * &imp.matrix,
            _ => x.clone(),
        };
        Ok((x, below))
    }

    /// `int_0^{min(t_k, upper)} X(t_k, s) g(s) ds` for a `g` constant on each cell.
    fn integrate(
        &mut self,
        k: usize,
        limit: Limit,
        upper: f64,
        g: impl Fn(f64) -> DVector<f64>,
    ) -> Result<DVector<f64>> {
        let t = self.kernel.targets[k];
        let stop = t.min(upper);
        let mut acc = DVector::zeros(self.spec.dim);
        let grid = self.grid;
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b > stop + snap_tol(stop) {
                break;
            }
            let value = g(0.5 * (a + b));
            if value.iter().all(|&v| v == 0.0) {
                continue;
            }
            let (xa, _) = self.endpoints(k, a, limit)?;
            let (_, xb) = self.endpoints(k, b, limit)?;
            acc += (xa + xb) * value * (0.5 * (b - a));
        }
        Ok(acc)
    }

    fn summands(&mut self, k: usize, limit: Limit) -> Result<Summands> {
        let spec = self.spec;
        let t = self.kernel.targets[k];
        let n = spec.dim;
        if t == 0.0 {
            let jumps = match limit {
                Limit::Value => spec.x0.clone(),
                Limit::Left => spec.phi.at_left(0.0).clone(),
            };
            return Ok(Summands {
                forcing: DVector::zeros(n),
                prehistory: DVector::zeros(n),
                jumps,
            });
        }

        let forcing = if is_zero(&spec.forcing) {
            DVector::zeros(n)
        } else {
            self.integrate(k, limit, t, |s| spec.forcing.at(s).clone())?
        };

        let mut prehistory = DVector::zeros(n);
        if !is_zero(&spec.phi) {
            for term in &spec.terms {
                let DelayKind::Lag(theta) = term.delay else {
                    continue;
                };
                if theta <= 0.0 {
                    continue;
                }
                prehistory -= self.integrate(k, limit, theta, |s| {
                    term.coefficient.at(s) * spec.phi.at(s - theta)
                })?;
            }
        }

        let mut jumps = match limit {
            Limit::Value => &self.kernel.at(0.0)?[k].0 * &spec.x0,
            Limit::Left => &self.kernel.at(0.0)?[k].1 * &spec.x0,
        };
        let events: Vec<(f64, DVector<f64>)> = self
            .events
            .iter()
            .filter(|e| e.offset.iter().any(|&v| v != 0.0))
            .map(|e| (e.time, e.offset.clone()))
            .collect();
        for (time, offset) in events {
            let included = match limit {
                Limit::Value => time <= t + snap_tol(t),
                Limit::Left => time < t - snap_tol(t),
            };
            if !included {
                continue;
            }
            let node = self.node_near(time);
            let entry = &self.kernel.at(node)?[k];
            let x = match limit {
                Limit::Value => &entry.0,
                Limit::Left => &entry.1,
            };
            jumps += x * offset;
        }
        Ok(Summands {
            forcing,
            prehistory,
            jumps,
        })
    }

    /// The grid node representing time `u` (exact node values are cache keys).
    fn node_near(&self, u: f64) -> f64 {
        let idx = self.grid.partition_point(|&g| g < u - snap_tol(u));
        match self.grid.get(idx) {
            Some(&g) if near(g, u) => g,
            _ => u,
        }
    }
}

fn is_zero(p: &Profile<DVector<f64>>) -> bool {
    p.values().iter().all(|v| v.iter().all(|&x| x == 0.0))
}

fn check_grid(input: &RepresentationInput) -> Result<()> {
    let grid = &input.quad_grid;
    if grid.first() != Some(&0.0) {
        return Err(Error::Argument("quadrature grid must start at 0".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument(
            "quadrature grid must be strictly increasing".into(),
        ));
    }
    let t_max = input.target_times[input.target_times.len() - 1];
    let has = |u: f64| {
        let idx = grid.partition_point(|&g| g < u - snap_tol(u));
        grid.get(idx).is_some_and(|&g| near(g, u))
    };
    for &t in &input.target_times {
        if !has(t) {
            return Err(Error::Argument(format!(
                "target {t} is not a quadrature node"
            )));
        }
    }
    for tau in input.spec.impulses.times(t_max) {
        if !has(tau) {
            return Err(Error::Argument(format!(
                "impulse time {tau} is not a quadrature node"
            )));
        }
    }
    Ok(())
}

/// The three summands at every target time.
pub fn represent_summands(input: &RepresentationInput, limit: Limit) -> Result<Vec<Summands>> {
    check_supported(&input.spec)?;
    check_targets(&input.target_times, input.spec.horizon)?;
    check_grid(input)?;
    let mut eval = Evaluator::new(
        &input.spec,
        &input.quad_grid,
        &input.target_times,
        input.control.dt,
    );
    (0..input.target_times.len())
        .map(|k| eval.summands(k, limit))
        .collect()
}

/// `x(t)` from the representation, for every target time.
pub fn represent_solution(input: &RepresentationInput) -> Result<Vec<DVector<f64>>> {
    Ok(represent_summands(input, Limit::Value)?
        .iter()
        .map(Summands::total)
        .collect())
}

/// `x(t - 0)` from the representation, for every target time.
pub fn represent_left_limits(input: &RepresentationInput) -> Result<Vec<DVector<f64>>> {
    Ok(represent_summands(input, Limit::Left)?
        .iter()
        .map(Summands::total)
        .collect())
}

/// The Cauchy operator `(C f)(t) = int_0^t X(t,s) f(s) ds`.
pub fn cauchy_apply(
    spec: &SystemSpec,
    f: &Profile<DVector<f64>>,
    t: f64,
    control: &StepControl,
) -> Result<DVector<f64>> {
    check_supported(spec)?;
    check_targets(&[t], spec.horizon)?;
    if f.values().iter().any(|v| v.len() != spec.dim) {
        return Err(Error::Argument(format!(
            "f must have dimension {}",
            spec.dim
        )));
    }
    if f.values()
        .iter()
        .any(|v| !crate::linalg::all_finite(v.iter()))
    {
        return Err(Error::Argument("f must be bounded".into()));
    }
    if t == 0.0 || is_zero(f) {
        return Ok(DVector::zeros(spec.dim));
    }
    let targets = [t];
    let grid = aligned_grid(spec, &targets, f.knots(), control.dt);
    let mut eval = Evaluator::new(spec, &grid, &targets, control.dt);
    eval.integrate(0, Limit::Value, t, |s| f.at(s).clone())
}

/// Relative deviation between the representation and a direct solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub target_times: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub dt: f64,
}

/// `max_t |represented - solved| / (1 + |solved|)`, per target and overall.
pub fn representation_residual(
    spec: &SystemSpec,
    target_times: &[f64],
    control: &StepControl,
) -> Result<ResidualReport> {
    let input = RepresentationInput::new(spec.clone(), target_times.to_vec(), *control)?;
    let represented = represent_solution(&input)?;
    let traj = solve_with_nodes(spec, control, target_times)?;
    let residuals = target_times
        .iter()
        .zip(&represented)
        .map(|(&t, rep)| {
            let direct = traj.evaluate(t)?;
            Ok(vec_norm(&(rep - &direct)) / (1.0 + vec_norm(&direct)))
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_residual = residuals.iter().copied().fold(0.0, f64::max);
    Ok(ResidualReport {
        target_times: target_times.to_vec(),
        residuals,
        max_residual,
        dt: control.dt,
    })
}
