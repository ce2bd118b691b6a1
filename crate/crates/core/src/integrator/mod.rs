//! Numerical solution of the impulsive delay system and of its `s`-curtailed
//! homogeneous version, whose solution with identity initial value is the
//! fundamental matrix `X(t, s)`.

mod engine;
mod flow;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::fmt_e;
use crate::profile::Profile;
use crate::system::{validate, SystemSpec};

pub(crate) use engine::{Mode, Prepared};
pub(crate) use flow::{snap_tol, Flow};

/// Base step of the fixed-step scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub dt: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { dt: 1e-3 }
    }
}

impl StepControl {
    pub fn new(dt: f64) -> Result<Self> {
        if dt > 0.0 && dt.is_finite() {
            Ok(Self { dt })
        } else {
            Err(Error::StepSize(dt))
        }
    }
}

/// One jump of a computed solution.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpSample {
    pub time: f64,
    pub left: DVector<f64>,
    pub right: DVector<f64>,
}

/// Dense, right-continuous solution on `[0, horizon]`, extended by the
/// initial function to negative times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    flow: Flow,
    phi: Profile<DVector<f64>>,
    horizon: f64,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.flow.n
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Start of the solution interval (0 for full solves, `s` for curtailed columns).
    pub fn start(&self) -> f64 {
        self.flow.start
    }

    /// All step nodes, including every jump point.
    pub fn nodes(&self) -> &[f64] {
        &self.flow.nodes
    }

    /// Jump times, in order.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.flow.jumps.iter().map(|j| j.time).collect()
    }

    pub fn jumps(&self) -> Vec<JumpSample> {
        self.flow
            .jumps
            .iter()
            .map(|j| JumpSample {
                time: j.time,
                left: DVector::from_column_slice(&j.left),
                right: DVector::from_column_slice(&j.right),
            })
            .collect()
    }

    fn check_upper(&self, t: f64) -> Result<()> {
        if t > self.horizon + snap_tol(self.horizon) || t.is_nan() {
            Err(Error::Domain(format!(
                "t = {t} beyond horizon {}",
                self.horizon
            )))
        } else {
            Ok(())
        }
    }

    /// `x(t)`: the initial function before the start, the dense output after.
    pub fn evaluate(&self, t: f64) -> Result<DVector<f64>> {
        self.check_upper(t)?;
        if t < self.flow.start {
            return Ok(self.phi.at(t).clone());
        }
        let mut out = vec![0.0; self.flow.n];
        self.flow.value(t, &mut out);
        Ok(DVector::from_vec(out))
    }

    /// `x(t - 0)`.
    pub fn left_limit(&self, t: f64) -> Result<DVector<f64>> {
        self.check_upper(t)?;
        if t <= self.flow.start {
            return Ok(self.phi.at_left(t).clone());
        }
        let mut out = vec![0.0; self.flow.n];
        self.flow.value_left(t, &mut out);
        Ok(DVector::from_vec(out))
    }

    /// CSV with one row per step node and a left/right row pair at each jump.
    ///
    /// Columns: `t,x1..xn,is_jump,side`.
    pub fn to_csv(&self) -> String {
        let n = self.flow.n;
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        out.push_str(",is_jump,side\n");
        let mut buf = vec![0.0; n];
        let mut jumps = self.flow.jumps.iter().peekable();
        let push_row = |out: &mut String, t: f64, v: &[f64], jump: bool, side: &str| {
            out.push_str(&fmt_e(t));
            for x in v {
                out.push(',');
                out.push_str(&fmt_e(*x));
            }
            out.push_str(if jump { ",1," } else { ",0," });
            out.push_str(side);
            out.push('\n');
        };
        for &t in &self.flow.nodes {
            match jumps.peek() {
                Some(j) if (j.time - t).abs() <= snap_tol(t) => {
                    push_row(&mut out, t, &j.left, true, "left");
                    push_row(&mut out, t, &j.right, true, "right");
                    jumps.next();
                }
                _ => {
                    self.flow.value(t, &mut buf);
                    push_row(&mut out, t, &buf, false, "");
                }
            }
        }
        out
    }
}

/// `x(t)` for a computed trajectory of `spec`; negative times read `spec.phi`.
pub fn evaluate(traj: &Trajectory, spec: &SystemSpec, t: f64) -> Result<DVector<f64>> {
    if t < 0.0 {
        return Ok(spec.phi.at(t).clone());
    }
    traj.evaluate(t)
}

fn ensure_valid(spec: &SystemSpec) -> Result<()> {
    let violations = validate(spec);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidSystem(violations))
    }
}

/// Solve the full problem on `[0, horizon]`.
pub fn solve(spec: &SystemSpec, control: &StepControl) -> Result<Trajectory> {
    solve_with_nodes(spec, control, &[])
}

/// As [`solve`], with additional mandatory grid nodes.
pub fn solve_with_nodes(
    spec: &SystemSpec,
    control: &StepControl,
    extra: &[f64],
) -> Result<Trajectory> {
    ensure_valid(spec)?;
    let prep = Prepared::new(spec);
    let flow = prep.integrate(
        Mode::Full,
        0.0,
        spec.horizon,
        prep.x0.clone(),
        control.dt,
        extra,
    )?;
    Ok(Trajectory {
        flow,
        phi: spec.phi.clone(),
        horizon: spec.horizon,
    })
}

/// Columns of `X(., s)` on `[s, end]`.
#[derive(Debug, Clone)]
pub struct FundamentalSolution {
    flow: Flow,
    end: f64,
}

impl FundamentalSolution {
    pub(crate) fn from_flow(flow: Flow, end: f64) -> Self {
        Self { flow, end }
    }

    pub fn s(&self) -> f64 {
        self.flow.start
    }

    pub fn dim(&self) -> usize {
        self.flow.n
    }

    pub fn end(&self) -> f64 {
        self.end
    }

    fn check(&self, t: f64) -> Result<()> {
        if t > self.end + snap_tol(self.end) || t.is_nan() {
            Err(Error::Domain(format!(
                "t = {t} beyond computed range {}",
                self.end
            )))
        } else {
            Ok(())
        }
    }

    /// `X(t, s)`; zero for `t < s`.
    pub fn at(&self, t: f64) -> Result<DMatrix<f64>> {
        self.check(t)?;
        let n = self.flow.n;
        if t < self.flow.start {
            return Ok(DMatrix::zeros(n, n));
        }
        let mut out = vec![0.0; n * n];
        self.flow.value(t, &mut out);
        Ok(DMatrix::from_column_slice(n, n, &out))
    }

    /// `X(t - 0, s)`.
    pub fn left_limit(&self, t: f64) -> Result<DMatrix<f64>> {
        self.check(t)?;
        let n = self.flow.n;
        if t <= self.flow.start {
            return Ok(DMatrix::zeros(n, n));
        }
        let mut out = vec![0.0; n * n];
        self.flow.value_left(t, &mut out);
        Ok(DMatrix::from_column_slice(n, n, &out))
    }

    /// Column `k` as a trajectory (zero before `s`).
    pub fn column(&self, k: usize) -> Trajectory {
        let n = self.flow.n;
        Trajectory {
            flow: self.flow.column(k),
            phi: Profile::Constant(DVector::zeros(n)),
            horizon: self.end,
        }
    }

    pub fn columns(&self) -> Vec<Trajectory> {
        (0..self.flow.n).map(|k| self.column(k)).collect()
    }
}

/// Solve the `s`-curtailed problem for identity initial data, up to the horizon.
pub fn fundamental_matrix(
    spec: &SystemSpec,
    s: f64,
    control: &StepControl,
) -> Result<FundamentalSolution> {
    fundamental_matrix_until(spec, s, spec.horizon, control)
}

/// As [`fundamental_matrix`] but stopping at `end <= horizon`.
pub fn fundamental_matrix_until(
    spec: &SystemSpec,
    s: f64,
    end: f64,
    control: &StepControl,
) -> Result<FundamentalSolution> {
    ensure_valid(spec)?;
    if !(s >= 0.0 && s < spec.horizon) {
        return Err(Error::Domain(format!(
            "s = {s} outside [0, {})",
            spec.horizon
        )));
    }
    if !(end > s && end <= spec.horizon) {
        return Err(Error::Domain(format!(
            "end = {end} not in ({s}, {}]",
            spec.horizon
        )));
    }
    let prep = Prepared::new(spec);
    curtailed(&prep, s, end, control.dt, &[])
}

pub(crate) fn curtailed(
    prep: &Prepared,
    s: f64,
    end: f64,
    dt: f64,
    extra: &[f64],
) -> Result<FundamentalSolution> {
    let n = prep.n;
    let mut init = vec![0.0; n * n];
    for i in 0..n {
        init[i * n + i] = 1.0;
    }
    let flow = prep.integrate(Mode::Curtailed, s, end, init, dt, extra)?;
    Ok(FundamentalSolution::from_flow(flow, end))
}

/// Samples of `X(t, s)` on a rectangular grid.
#[derive(Debug, Clone)]
pub struct FundamentalMatrix {
    pub s_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// `samples[ti][si] = X(t_grid[ti], s_grid[si])`.
    pub samples: Vec<Vec<DMatrix<f64>>>,
}

impl FundamentalMatrix {
    pub fn get(&self, ti: usize, si: usize) -> &DMatrix<f64> {
        &self.samples[ti][si]
    }

    /// `(t, s, X(t, s))` for every grid pair.
    pub fn pairs(&self) -> impl Iterator<Item = (f64, f64, &DMatrix<f64>)> {
        self.t_grid.iter().enumerate().flat_map(move |(ti, &t)| {
            self.s_grid
                .iter()
                .enumerate()
                .map(move |(si, &s)| (t, s, &self.samples[ti][si]))
        })
    }

    pub fn dim(&self) -> usize {
        self.samples
            .first()
            .and_then(|row| row.first())
            .map_or(0, |m| m.nrows())
    }

    /// CSV with columns `t,s,X11,X12,...,Xnn` (row-major entries).
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut out = String::from("t,s");
        for i in 1..=n {
            for j in 1..=n {
                out.push_str(&format!(",X{i}{j}"));
            }
        }
        out.push('\n');
        for (t, s, m) in self.pairs() {
            out.push_str(&fmt_e(t));
            out.push(',');
            out.push_str(&fmt_e(s));
            for i in 0..n {
                for j in 0..n {
                    out.push(',');
                    out.push_str(&fmt_e(m[(i, j)]));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// `from, from + step, ...` up to `to` (included when it lands on the lattice).
pub fn uniform_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !from.is_finite() || !to.is_finite() || to < from {
        return Err(Error::Argument(format!("bad grid {from}:{to}:{step}")));
    }
    let count = ((to - from) / step * (1.0 + 1e-12)).floor() as usize;
    if count > 10_000_000 {
        return Err(Error::Argument(format!(
            "grid {from}:{to}:{step} is too fine"
        )));
    }
    Ok((0..=count).map(|k| from + k as f64 * step).collect())
}

fn check_grid(name: &str, grid: &[f64], horizon: f64) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Argument(format!("{name} is empty")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument(format!(
            "{name} must be strictly increasing"
        )));
    }
    if grid[0] < 0.0 || grid[grid.len() - 1] > horizon {
        return Err(Error::Domain(format!("{name} leaves [0, {horizon}]")));
    }
    Ok(())
}

/// `X(t, s)` for all grid pairs; each `s` column is an independent solve.
pub fn fundamental_grid(
    spec: &SystemSpec,
    s_grid: &[f64],
    t_grid: &[f64],
    control: &StepControl,
) -> Result<FundamentalMatrix> {
    ensure_valid(spec)?;
    check_grid("s grid", s_grid, spec.horizon)?;
    check_grid("t grid", t_grid, spec.horizon)?;
    let prep = Prepared::new(spec);
    let n = spec.dim;
    let t_max = t_grid[t_grid.len() - 1];
    let mut by_s = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let column: Vec<DMatrix<f64>> = if s >= t_max {
            t_grid
                .iter()
                .map(|&t| {
                    if t < s {
                        DMatrix::zeros(n, n)
                    } else {
                        DMatrix::identity(n, n)
                    }
                })
                .collect()
        } else {
            let sol = curtailed(&prep, s, t_max, control.dt, t_grid)?;
            t_grid.iter().map(|&t| sol.at(t)).collect::<Result<_>>()?
        };
        by_s.push(column);
    }
    let samples = (0..t_grid.len())
        .map(|ti| by_s.iter().map(|col| col[ti].clone()).collect())
        .collect();
    Ok(FundamentalMatrix {
        s_grid: s_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        samples,
    })
}

#[cfg(test)]
mod tests;
