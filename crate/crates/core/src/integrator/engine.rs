//! Method of steps with the classical four-stage Runge-Kutta scheme.
//!
//! Delayed values are read from the dense output already computed. Every
//! jump point, every knot of the step tables, and their first images under
//! each lag are mandatory grid nodes, so no step straddles a low-order
//! discontinuity of the solution or of the data.

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::system::{DelayKind, SystemSpec};
use nalgebra::{DMatrix, DVector};

use super::flow::{snap_tol, Flow, Side};

#[derive(Debug, Clone)]
struct FlatProfile {
    knots: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl FlatProfile {
    fn index(&self, t: f64) -> usize {
        self.knots.partition_point(|&k| k <= t).saturating_sub(1)
    }

    fn at(&self, t: f64) -> &[f64] {
        &self.values[self.index(t)]
    }

    fn from_matrices(p: &Profile<DMatrix<f64>>) -> Self {
        let flat = |m: &DMatrix<f64>| m.transpose().as_slice().to_vec();
        Self {
            knots: p.knots().to_vec(),
            values: p.values().iter().map(flat).collect(),
        }
    }

    fn from_vectors(p: &Profile<DVector<f64>>) -> Self {
        Self {
            knots: p.knots().to_vec(),
            values: p.values().iter().map(|v| v.as_slice().to_vec()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum TermKind {
    Current,
    Lag(f64),
    Frozen(f64),
}

#[derive(Debug, Clone)]
struct PreparedTerm {
    kind: TermKind,
    coeff: FlatProfile,
}

#[derive(Debug, Clone)]
pub(crate) struct PreparedImpulse {
    pub time: f64,
    /// Row-major.
    pub matrix: Vec<f64>,
    pub offset: Vec<f64>,
}

/// Whether a solve is the full problem or the homogeneous `s`-curtailed one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Mode {
    /// Forcing, initial function and jump offsets are active.
    Full,
    /// Zero forcing, zero prehistory, no offsets.
    Curtailed,
}

/// Flattened copy of a [`SystemSpec`] tuned for repeated solves.
#[derive(Debug, Clone)]
pub(crate) struct Prepared {
    pub n: usize,
    terms: Vec<PreparedTerm>,
    forcing: FlatProfile,
    phi: FlatProfile,
    pub x0: Vec<f64>,
    pub impulses: Vec<PreparedImpulse>,
    lags: Vec<f64>,
    coeff_knots: Vec<f64>,
}

impl Prepared {
    pub fn new(spec: &SystemSpec) -> Self {
        let terms: Vec<PreparedTerm> = spec
            .terms
            .iter()
            .map(|term| PreparedTerm {
                kind: match term.delay {
                    DelayKind::Lag(0.0) => TermKind::Current,
                    DelayKind::Lag(theta) => TermKind::Lag(theta),
                    DelayKind::Frozen(c) => TermKind::Frozen(c),
                },
                coeff: FlatProfile::from_matrices(&term.coefficient),
            })
            .collect();
        let mut lags: Vec<f64> = terms
            .iter()
            .filter_map(|t| match t.kind {
                TermKind::Lag(theta) => Some(theta),
                _ => None,
            })
            .collect();
        lags.sort_by(f64::total_cmp);
        lags.dedup();
        let mut coeff_knots: Vec<f64> = terms.iter().flat_map(|t| t.coeff.knots.clone()).collect();
        coeff_knots.sort_by(f64::total_cmp);
        coeff_knots.dedup();
        let impulses = spec
            .impulse_events()
            .into_iter()
            .map(|imp| PreparedImpulse {
                time: imp.time,
                matrix: imp.matrix.transpose().as_slice().to_vec(),
                offset: imp.offset.as_slice().to_vec(),
            })
            .collect();
        Self {
            n: spec.dim,
            terms,
            forcing: FlatProfile::from_vectors(&spec.forcing),
            phi: FlatProfile::from_vectors(&spec.phi),
            x0: spec.x0.as_slice().to_vec(),
            impulses,
            lags,
            coeff_knots,
        }
    }

    pub fn min_lag(&self) -> f64 {
        self.lags.first().copied().unwrap_or(f64::INFINITY)
    }

    /// Mandatory nodes of a solve on `[start, end]`.
    pub fn mandatory_nodes(&self, mode: Mode, start: f64, end: f64, extra: &[f64]) -> Vec<f64> {
        let inside = |t: f64| t > start && t < end;
        let mut pinned = vec![(start, 2), (end, 2)];
        let mut loose = Vec::new();

        let mut sources = vec![start];
        for imp in &self.impulses {
            if imp.time > start && imp.time <= end {
                pinned.push((imp.time, 2));
                sources.push(imp.time);
            }
        }
        pinned.extend(extra.iter().copied().filter(|&t| inside(t)).map(|t| (t, 1)));
        for term in &self.terms {
            if let TermKind::Frozen(c) = term.kind {
                if inside(c) {
                    pinned.push((c, 1));
                }
            }
        }
        sources.extend(self.coeff_knots.iter().copied().filter(|&t| inside(t)));
        if mode == Mode::Full {
            sources.extend(self.forcing.knots.iter().copied().filter(|&t| inside(t)));
            // initial-function knots matter only through their images
            sources.extend(self.phi.knots.iter().copied().filter(|&t| t < start));
        }
        loose.extend(sources.iter().copied().filter(|&t| inside(t)));
        for &theta in &self.lags {
            loose.extend(sources.iter().map(|&d| d + theta).filter(|&t| inside(t)));
        }
        merge_nodes(pinned, loose)
    }

    /// Full step grid: mandatory nodes refined to steps no longer than
    /// `min(dt, smallest positive lag)`.
    pub fn step_grid(&self, mode: Mode, start: f64, end: f64, dt: f64, extra: &[f64]) -> Vec<f64> {
        let hmax = dt.min(self.min_lag());
        let nodes = self.mandatory_nodes(mode, start, end, extra);
        let mut grid = Vec::with_capacity(((end - start) / hmax) as usize + nodes.len() + 1);
        grid.push(nodes[0]);
        for w in nodes.windows(2) {
            let (a, b) = (w[0], w[1]);
            let count = (((b - a) / hmax) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            let h = (b - a) / count as f64;
            for i in 1..count {
                grid.push(a + i as f64 * h);
            }
            grid.push(b);
        }
        grid
    }

    fn history_into(&self, mode: Mode, xi: f64, out: &mut [f64]) {
        match mode {
            Mode::Full => out.copy_from_slice(self.phi.at(xi)),
            Mode::Curtailed => out.fill(0.0),
        }
    }

    /// Integrate from `start` (state `init`, `n x p` column-major) to `end`.
    pub fn integrate(
        &self,
        mode: Mode,
        start: f64,
        end: f64,
        init: Vec<f64>,
        dt: f64,
        extra: &[f64],
    ) -> Result<Flow> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::StepSize(dt));
        }
        if !(end > start) {
            return Err(Error::Domain(format!(
                "integration interval [{start}, {end}] is empty"
            )));
        }
        let n = self.n;
        let w = init.len();
        let p = w / n;
        debug_assert!(mode == Mode::Full || p == n);
        debug_assert!(mode == Mode::Curtailed || p == 1);

        let grid = self.step_grid(mode, start, end, dt, extra);
        let mut flow = Flow::new(n, p, start, init.clone());
        let mut ws = Workspace::new(w, self.terms.len());
        let mut x = init;
        let mut next_jump = self.impulses.partition_point(|imp| imp.time <= start);

        for pair in grid.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let h = b - a;
            let step = StepFrame {
                a,
                mid: a + 0.5 * h,
            };
            for (slot, term) in ws.coeff_idx.iter_mut().zip(&self.terms) {
                *slot = term.coeff.index(step.mid);
            }
            ws.forcing_idx = self.forcing.index(step.mid);

            let mut k1 = std::mem::take(&mut ws.k1);
            let mut k2 = std::mem::take(&mut ws.k2);
            let mut k3 = std::mem::take(&mut ws.k3);
            let mut k4 = std::mem::take(&mut ws.k4);
            let mut stage = std::mem::take(&mut ws.stage);

            self.rhs(mode, &flow, &step, &mut ws, a, &x, &mut k1)?;
            for i in 0..w {
                stage[i] = x[i] + 0.5 * h * k1[i];
            }
            self.rhs(mode, &flow, &step, &mut ws, step.mid, &stage, &mut k2)?;
            for i in 0..w {
                stage[i] = x[i] + 0.5 * h * k2[i];
            }
            self.rhs(mode, &flow, &step, &mut ws, step.mid, &stage, &mut k3)?;
            for i in 0..w {
                stage[i] = x[i] + h * k3[i];
            }
            self.rhs(mode, &flow, &step, &mut ws, b, &stage, &mut k4)?;
            for i in 0..w {
                stage[i] = x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            // derivative at the right end, for the dense output
            self.rhs(mode, &flow, &step, &mut ws, b, &stage, &mut k2)?;
            if !stage.iter().all(|v| v.is_finite()) {
                return Err(Error::Numerical(format!("non-finite state at t = {b}")));
            }
            flow.push_step(b, &x, &k1, &stage, &k2);
            x.copy_from_slice(&stage);

            if let Some(imp) = self.impulses.get(next_jump) {
                if (imp.time - b).abs() <= snap_tol(b) {
                    let left = x.clone();
                    for c in 0..p {
                        for i in 0..n {
                            let row = &imp.matrix[i * n..(i + 1) * n];
                            let col = &left[c * n..(c + 1) * n];
                            x[c * n + i] = row.iter().zip(col).map(|(r, v)| r * v).sum();
                        }
                    }
                    if mode == Mode::Full {
                        for i in 0..n {
                            x[i] += imp.offset[i];
                        }
                    }
                    flow.push_jump(b, left, x.clone());
                    next_jump += 1;
                }
            }

            ws.k1 = k1;
            ws.k2 = k2;
            ws.k3 = k3;
            ws.k4 = k4;
            ws.stage = stage;
        }
        Ok(flow)
    }

    #[allow(clippy::too_many_arguments)]
    fn rhs(
        &self,
        mode: Mode,
        flow: &Flow,
        step: &StepFrame,
        ws: &mut Workspace,
        t: f64,
        x: &[f64],
        out: &mut [f64],
    ) -> Result<()> {
        let n = self.n;
        let p = x.len() / n;
        match mode {
            Mode::Full => out.copy_from_slice(&self.forcing.values[ws.forcing_idx]),
            Mode::Curtailed => out.fill(0.0),
        }
        for (ti, term) in self.terms.iter().enumerate() {
            let a = &term.coeff.values[ws.coeff_idx[ti]];
            let y: &[f64] = match term.kind {
                TermKind::Current => x,
                TermKind::Lag(theta) => {
                    let window_mid = step.mid - theta;
                    let xi = t - theta;
                    if window_mid < flow.start {
                        self.history_into(mode, window_mid, &mut ws.delayed);
                    } else {
                        let side = if xi > window_mid {
                            Side::Left
                        } else {
                            Side::Right
                        };
                        flow.value_into(xi.max(flow.start), side, &mut ws.delayed);
                    }
                    &ws.delayed
                }
                TermKind::Frozen(c) => {
                    if c < flow.start - snap_tol(c) {
                        self.history_into(mode, c, &mut ws.delayed);
                    } else if c > step.a + snap_tol(c) {
                        return Err(Error::Domain(format!(
                            "frozen argument c = {c} needed at t = {t} < c"
                        )));
                    } else {
                        flow.value(c, &mut ws.delayed);
                    }
                    &ws.delayed
                }
            };
            for col in 0..p {
                let yc = &y[col * n..(col + 1) * n];
                for i in 0..n {
                    let row = &a[i * n..(i + 1) * n];
                    let mut acc = 0.0;
                    for j in 0..n {
                        acc += row[j] * yc[j];
                    }
                    out[col * n + i] -= acc;
                }
            }
        }
        Ok(())
    }
}

struct StepFrame {
    a: f64,
    mid: f64,
}

struct Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
    delayed: Vec<f64>,
    coeff_idx: Vec<usize>,
    forcing_idx: usize,
}

impl Workspace {
    fn new(w: usize, terms: usize) -> Self {
        Self {
            k1: vec![0.0; w],
            k2: vec![0.0; w],
            k3: vec![0.0; w],
            k4: vec![0.0; w],
            stage: vec![0.0; w],
            delayed: vec![0.0; w],
            coeff_idx: vec![0; terms],
            forcing_idx: 0,
        }
    }
}

fn merge_tol(t: f64) -> f64 {
    1e-10 * (1.0 + t.abs())
}

/// Sort and merge near-coincident nodes, keeping the value with the
/// highest priority in each cluster (jump times and interval ends first).
fn merge_nodes(pinned: Vec<(f64, u8)>, loose: Vec<f64>) -> Vec<f64> {
    let mut all: Vec<(f64, u8)> = pinned
        .into_iter()
        .chain(loose.into_iter().map(|t| (t, 0)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut out: Vec<(f64, u8)> = Vec::with_capacity(all.len());
    for (t, prio) in all {
        match out.last_mut() {
            Some(last) if (t - last.0).abs() <= merge_tol(t) => {
                if prio > last.1 {
                    *last = (t, prio);
                }
            }
            _ => out.push((t, prio)),
        }
    }
    out.into_iter().map(|(t, _)| t).collect()
}
