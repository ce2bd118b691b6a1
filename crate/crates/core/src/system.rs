//! The linear impulsive delay system
//!
//! ```text
//! x'(t) + sum_i A_i(t) x(h_i(t)) = r(t),   t >= 0
//! x(tau_j) = B_j x(tau_j - 0) + alpha_j,   j >= 1
//! x(xi) = phi(xi),  xi < 0;   x(0) = alpha_0
//! ```
//!
//! together with the checks of its standing hypotheses and a few derived
//! quantities (impulse counting, norm suprema).

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{all_finite, mat_norm};
use crate::profile::Profile;

/// How the delayed argument `h(t)` depends on `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayKind {
    /// `h(t) = t - lag`.
    Lag(f64),
    /// `h(t) = c`, a frozen argument.
    Frozen(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayTerm {
    pub coefficient: Profile<DMatrix<f64>>,
    pub delay: DelayKind,
}

impl DelayTerm {
    pub fn lag(coefficient: DMatrix<f64>, lag: f64) -> Self {
        Self {
            coefficient: Profile::Constant(coefficient),
            delay: DelayKind::Lag(lag),
        }
    }

    pub fn frozen(coefficient: DMatrix<f64>, at: f64) -> Self {
        Self {
            coefficient: Profile::Constant(coefficient),
            delay: DelayKind::Frozen(at),
        }
    }

    pub fn scalar_lag(a: f64, lag: f64) -> Self {
        Self::lag(DMatrix::from_element(1, 1, a), lag)
    }

    pub fn scalar_frozen(a: f64, at: f64) -> Self {
        Self::frozen(DMatrix::from_element(1, 1, a), at)
    }

    /// The constant lag, or `None` for a frozen argument.
    pub fn constant_lag(&self) -> Option<f64> {
        match self.delay {
            DelayKind::Lag(theta) => Some(theta),
            DelayKind::Frozen(_) => None,
        }
    }
}

/// `h(t)` for a single delay term.
pub fn evaluate_delay(term: &DelayTerm, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("delay queried at t = {t} < 0")));
    }
    match term.delay {
        DelayKind::Lag(theta) => Ok(t - theta),
        DelayKind::Frozen(c) if t < c => Err(Error::Domain(format!(
            "frozen argument c = {c} queried at t = {t} < c"
        ))),
        DelayKind::Frozen(c) => Ok(c),
    }
}

/// One realised jump `x(time) = matrix * x(time - 0) + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Impulse {
    pub time: f64,
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ImpulseSchedule {
    Explicit(Vec<Impulse>),
    /// Jumps at `period, 2 period, ...` with the same matrix and offset.
    Periodic {
        period: f64,
        matrix: DMatrix<f64>,
        offset: DVector<f64>,
    },
}

impl Default for ImpulseSchedule {
    fn default() -> Self {
        ImpulseSchedule::Explicit(Vec::new())
    }
}

impl ImpulseSchedule {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn periodic(period: f64, matrix: DMatrix<f64>) -> Self {
        let n = matrix.nrows();
        ImpulseSchedule::Periodic {
            period,
            matrix,
            offset: DVector::zeros(n),
        }
    }

    /// Explicit schedule with zero offsets.
    pub fn explicit(points: &[f64], matrices: Vec<DMatrix<f64>>) -> Self {
        ImpulseSchedule::Explicit(
            points
                .iter()
                .zip(matrices)
                .map(|(&time, matrix)| {
                    let n = matrix.nrows();
                    Impulse {
                        time,
                        matrix,
                        offset: DVector::zeros(n),
                    }
                })
                .collect(),
        )
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, ImpulseSchedule::Explicit(list) if list.is_empty())
    }

    /// Jump times `<= until`, in order.
    pub fn times(&self, until: f64) -> Vec<f64> {
        match self {
            ImpulseSchedule::Explicit(list) => list
                .iter()
                .map(|imp| imp.time)
                .take_while(|&t| t <= until)
                .collect(),
            ImpulseSchedule::Periodic { period, .. } => {
                if !(*period > 0.0) || !until.is_finite() {
                    return Vec::new();
                }
                (1..)
                    .map(|j| j as f64 * period)
                    .take_while(|&t| t <= until)
                    .collect()
            }
        }
    }

    /// All jumps with `time <= until`.
    pub fn events(&self, until: f64) -> Vec<Impulse> {
        match self {
            ImpulseSchedule::Explicit(list) => list
                .iter()
                .take_while(|imp| imp.time <= until)
                .cloned()
                .collect(),
            ImpulseSchedule::Periodic { matrix, offset, .. } => self
                .times(until)
                .into_iter()
                .map(|time| Impulse {
                    time,
                    matrix: matrix.clone(),
                    offset: offset.clone(),
                })
                .collect(),
        }
    }
}

/// `i(t, s)`: the number of jump points in the closed segment `[s, t]`.
pub fn count_impulses(schedule: &ImpulseSchedule, s: f64, t: f64) -> Result<usize> {
    if s > t {
        return Err(Error::Argument(format!(
            "count_impulses needs s <= t, got s = {s}, t = {t}"
        )));
    }
    Ok(schedule
        .times(t)
        .into_iter()
        .filter(|&tau| tau >= s)
        .count())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub dim: usize,
    pub terms: Vec<DelayTerm>,
    pub impulses: ImpulseSchedule,
    pub forcing: Profile<DVector<f64>>,
    /// Initial function on `(-inf, 0)`.
    pub phi: Profile<DVector<f64>>,
    /// `x(0)`, which doubles as `alpha_0`.
    pub x0: DVector<f64>,
    pub horizon: f64,
}

impl SystemSpec {
    /// A homogeneous system with no terms, no jumps, zero history and zero initial value.
    pub fn new(dim: usize, horizon: f64) -> Self {
        Self {
            dim,
            terms: Vec::new(),
            impulses: ImpulseSchedule::none(),
            forcing: Profile::Constant(DVector::zeros(dim)),
            phi: Profile::Constant(DVector::zeros(dim)),
            x0: DVector::zeros(dim),
            horizon,
        }
    }

    pub fn with_term(mut self, term: DelayTerm) -> Self {
        self.terms.push(term);
        self
    }

    pub fn with_impulses(mut self, impulses: ImpulseSchedule) -> Self {
        self.impulses = impulses;
        self
    }

    pub fn with_forcing(mut self, forcing: Profile<DVector<f64>>) -> Self {
        self.forcing = forcing;
        self
    }

    pub fn with_phi(mut self, phi: Profile<DVector<f64>>) -> Self {
        self.phi = phi;
        self
    }

    pub fn with_x0(mut self, x0: DVector<f64>) -> Self {
        self.x0 = x0;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    /// Jumps realised on `[0, horizon]`.
    pub fn impulse_events(&self) -> Vec<Impulse> {
        self.impulses.events(self.horizon)
    }

    /// Largest constant lag, or infinity if a frozen argument is present.
    pub fn max_delay(&self) -> f64 {
        self.terms.iter().fold(0.0, |acc, term| match term.delay {
            DelayKind::Lag(theta) => acc.max(theta),
            DelayKind::Frozen(_) => f64::INFINITY,
        })
    }

    pub fn has_frozen_terms(&self) -> bool {
        self.terms
            .iter()
            .any(|term| matches!(term.delay, DelayKind::Frozen(_)))
    }

    /// `sup_{t in [0, horizon]} sum_k |A_k(t)|`, exact for step tables.
    pub fn coefficient_sum_sup(&self) -> f64 {
        let mut probes = vec![0.0];
        for term in &self.terms {
            probes.extend(
                term.coefficient
                    .knots()
                    .iter()
                    .copied()
                    .filter(|&k| k > 0.0 && k <= self.horizon),
            );
        }
        probes
            .into_iter()
            .map(|t| {
                self.terms
                    .iter()
                    .map(|term| mat_norm(term.coefficient.at(t)))
                    .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `sum_k sup_{t in [0, horizon]} |A_k(t)|`.
    pub fn coefficient_sup_sum(&self) -> f64 {
        self.terms
            .iter()
            .map(|term| term.coefficient.sup_on(0.0, self.horizon, mat_norm))
            .sum()
    }

    /// `int_s^t sum_k |A_k(z)| dz`, exact for step tables.
    pub fn coefficient_norm_integral(&self, s: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.coefficient.integrate_by(s, t, mat_norm))
            .sum()
    }
}

/// Which standing hypothesis a violation belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Hypothesis {
    /// Dimensions, shapes and horizon.
    Structure,
    /// Jump points increase to infinity.
    A1,
    /// Bounded coefficients and forcing.
    A2,
    /// `h_i(t) <= t`.
    A3,
    /// Bounded initial function.
    A4,
    /// Bounded jump matrices.
    A5,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self {
            Hypothesis::Structure => "structure",
            Hypothesis::A1 => "a1",
            Hypothesis::A2 => "a2",
            Hypothesis::A3 => "a3",
            Hypothesis::A4 => "a4",
            Hypothesis::A5 => "a5",
        };
        f.write_str(tag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub hypothesis: Hypothesis,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.hypothesis, self.message)
    }
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, hypothesis: Hypothesis, message: impl Into<String>) {
        self.0.push(Violation {
            hypothesis,
            message: message.into(),
        });
    }

    fn check_matrix(&mut self, hyp: Hypothesis, what: &str, m: &DMatrix<f64>, n: usize) {
        if m.nrows() != n || m.ncols() != n {
            self.push(
                Hypothesis::Structure,
                format!(
                    "{what}: expected {n}x{n} matrix, got {}x{}",
                    m.nrows(),
                    m.ncols()
                ),
            );
        } else if !all_finite(m.iter()) {
            self.push(hyp, format!("{what}: entries must be finite"));
        }
    }

    fn check_vector(&mut self, hyp: Hypothesis, what: &str, v: &DVector<f64>, n: usize) {
        if v.len() != n {
            self.push(
                Hypothesis::Structure,
                format!("{what}: expected vector of length {n}, got {}", v.len()),
            );
        } else if !all_finite(v.iter()) {
            self.push(hyp, format!("{what}: entries must be finite"));
        }
    }
}

/// Every violated hypothesis, with the offending datum. Empty means valid.
pub fn validate(spec: &SystemSpec) -> Vec<Violation> {
    let mut out = Collector(Vec::new());
    let n = spec.dim;
    if n == 0 {
        out.push(Hypothesis::Structure, "dimension must be at least 1");
    }
    if !(spec.horizon > 0.0 && spec.horizon.is_finite()) {
        out.push(
            Hypothesis::Structure,
            format!("horizon must be positive and finite, got {}", spec.horizon),
        );
    }
    out.check_vector(Hypothesis::Structure, "x0", &spec.x0, n);

    for (i, term) in spec.terms.iter().enumerate() {
        for (k, m) in term.coefficient.values().iter().enumerate() {
            out.check_matrix(
                Hypothesis::A2,
                &format!("terms[{i}].coefficient[{k}]"),
                m,
                n,
            );
        }
        if let Some(&first) = term.coefficient.knots().first() {
            if first > 0.0 {
                out.push(
                    Hypothesis::A2,
                    format!("terms[{i}].coefficient table starts at {first} > 0"),
                );
            }
        }
        match term.delay {
            DelayKind::Lag(theta) if !theta.is_finite() => {
                out.push(Hypothesis::A3, format!("terms[{i}]: delay must be finite"))
            }
            DelayKind::Lag(theta) if theta < 0.0 => out.push(
                Hypothesis::A3,
                format!("terms[{i}]: delay negative (lag {theta})"),
            ),
            DelayKind::Frozen(c) if !(c >= 0.0) || !c.is_finite() => out.push(
                Hypothesis::Structure,
                format!("terms[{i}]: frozen time must be finite and >= 0, got {c}"),
            ),
            DelayKind::Frozen(c) if c > 0.0 => out.push(
                Hypothesis::A3,
                format!("terms[{i}]: frozen time {c} exceeds t on [0, {c})"),
            ),
            _ => {}
        }
    }

    match &spec.impulses {
        ImpulseSchedule::Explicit(list) => {
            for (j, imp) in list.iter().enumerate() {
                if !(imp.time > 0.0) || !imp.time.is_finite() {
                    out.push(
                        Hypothesis::A1,
                        format!("impulse point {} must be positive and finite", imp.time),
                    );
                }
                out.check_matrix(
                    Hypothesis::A5,
                    &format!("impulses.matrices[{j}]"),
                    &imp.matrix,
                    n,
                );
                out.check_vector(
                    Hypothesis::Structure,
                    &format!("impulses.offsets[{j}]"),
                    &imp.offset,
                    n,
                );
            }
            if list.windows(2).any(|w| w[0].time >= w[1].time) {
                out.push(Hypothesis::A1, "impulse points not strictly increasing");
            }
        }
        ImpulseSchedule::Periodic {
            period,
            matrix,
            offset,
        } => {
            if !(*period > 0.0) || !period.is_finite() {
                out.push(
                    Hypothesis::A1,
                    format!("impulse period must be positive and finite, got {period}"),
                );
            }
            out.check_matrix(Hypothesis::A5, "impulses.matrix", matrix, n);
            out.check_vector(Hypothesis::Structure, "impulses.offset", offset, n);
        }
    }

    for (k, v) in spec.forcing.values().iter().enumerate() {
        out.check_vector(Hypothesis::A2, &format!("forcing[{k}]"), v, n);
    }
    if let Some(&first) = spec.forcing.knots().first() {
        if first > 0.0 {
            out.push(
                Hypothesis::A2,
                format!("forcing table starts at {first} > 0"),
            );
        }
    }

    for (k, v) in spec.phi.values().iter().enumerate() {
        out.check_vector(Hypothesis::A4, &format!("phi[{k}]"), v, n);
    }
    if let Some(&first) = spec.phi.knots().first() {
        let reach = spec
            .terms
            .iter()
            .filter_map(DelayTerm::constant_lag)
            .filter(|t| t.is_finite())
            .fold(0.0, f64::max);
        if first > -reach {
            out.push(
                Hypothesis::A4,
                format!("phi table starts at {first}, must cover [-{reach}, 0)"),
            );
        }
    }
    out.0
}

/// Quantities entering the boundedness hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesesReport {
    /// `sup_j |B_j|` over the jumps on the horizon (0 if there are none).
    #[serde(rename = "M")]
    pub m: f64,
    /// Finite-horizon estimate of the asymptotic jump density.
    pub i_hat: f64,
    /// Window length used for `i_hat`.
    pub i_hat_window: f64,
    /// Largest lag; infinite when a frozen argument is present.
    pub delta: f64,
    /// `sup_t sum_k |A_k(t)|` on the horizon.
    #[serde(rename = "Q")]
    pub q: f64,
}

pub fn hypotheses_report(spec: &SystemSpec) -> HypothesesReport {
    hypotheses_report_with_window(spec, spec.horizon / 4.0)
}

/// As [`hypotheses_report`] with an explicit window for the jump-density estimate.
pub fn hypotheses_report_with_window(spec: &SystemSpec, window: f64) -> HypothesesReport {
    let events = spec.impulse_events();
    let m = events
        .iter()
        .map(|imp| mat_norm(&imp.matrix))
        .fold(0.0, f64::max);
    let times: Vec<f64> = events.iter().map(|imp| imp.time).collect();
    HypothesesReport {
        m,
        i_hat: density_estimate(&times, window),
        i_hat_window: window,
        delta: spec.max_delay(),
        q: spec.coefficient_sum_sup(),
    }
}

/// Exact `sup i(t,s)/(t-s)` over segments of length at least `window`.
///
/// A segment holding the points `a..=b` is at least `max(window, tau_b - tau_a)`
/// long, so the supremum is reached over pairs of jump points.
fn density_estimate(times: &[f64], window: f64) -> f64 {
    if times.is_empty() || !(window > 0.0) {
        return 0.0;
    }
    let mut best: f64 = 0.0;
    for a in 0..times.len() {
        for b in a..times.len() {
            let len = window.max(times[b] - times[a]);
            best = best.max((b - a + 1) as f64 / len);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalar(v: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, v)
    }

    #[test]
    fn delay_evaluation() {
        assert_eq!(
            evaluate_delay(&DelayTerm::scalar_lag(1.0, 1.0), 3.0).unwrap(),
            2.0
        );
        assert_eq!(
            evaluate_delay(&DelayTerm::scalar_frozen(1.0, 0.0), 7.0).unwrap(),
            0.0
        );
        assert_eq!(
            evaluate_delay(&DelayTerm::scalar_lag(1.0, 0.0), 5.0).unwrap(),
            5.0
        );
        assert!(matches!(
            evaluate_delay(&DelayTerm::scalar_frozen(1.0, 2.0), 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn counting_uses_closed_segment() {
        let sched = ImpulseSchedule::explicit(&[1.0, 2.0, 3.0], vec![scalar(0.5); 3]);
        assert_eq!(count_impulses(&sched, 0.5, 2.5).unwrap(), 2);
        assert_eq!(count_impulses(&sched, 2.0, 2.0).unwrap(), 1);
        assert!(count_impulses(&sched, 3.0, 2.0).is_err());
        let periodic = ImpulseSchedule::periodic(1.0, scalar(0.5));
        assert_eq!(count_impulses(&periodic, 0.0, 10.0).unwrap(), 10);
    }

    #[test]
    fn validation_flags_ordering_and_sign() {
        let spec = SystemSpec::new(1, 5.0)
            .with_impulses(ImpulseSchedule::explicit(&[1.0, 1.0], vec![scalar(1.0); 2]));
        let v = validate(&spec);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].hypothesis, Hypothesis::A1);
        assert_eq!(v[0].message, "impulse points not strictly increasing");

        let spec = SystemSpec::new(1, 5.0).with_term(DelayTerm::scalar_lag(1.0, -0.5));
        let v = validate(&spec);
        assert_eq!(v.len(), 1);
        assert!(v[0].message.contains("delay negative"));
    }

    #[test]
    fn stabilized_example_is_valid() {
        let spec = SystemSpec::new(1, 20.0)
            .with_term(DelayTerm::scalar_lag(-0.3, 1.0))
            .with_impulses(ImpulseSchedule::periodic(1.0, scalar(0.5)))
            .with_x0(DVector::from_element(1, 1.0));
        assert!(validate(&spec).is_empty());
    }

    #[test]
    fn validation_catches_shapes_and_frozen_times() {
        let spec = SystemSpec::new(2, 5.0)
            .with_term(DelayTerm::lag(DMatrix::zeros(2, 3), 1.0))
            .with_term(DelayTerm::frozen(DMatrix::zeros(2, 2), 0.5));
        let v = validate(&spec);
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].hypothesis, Hypothesis::Structure);
        assert_eq!(v[1].hypothesis, Hypothesis::A3);
    }

    #[test]
    fn phi_table_must_cover_largest_lag() {
        use crate::profile::StepTable;
        let table = StepTable::new(vec![-0.5], vec![DVector::from_element(1, 1.0)]).unwrap();
        let spec = SystemSpec::new(1, 5.0)
            .with_term(DelayTerm::scalar_lag(1.0, 1.0))
            .with_phi(Profile::Table(table));
        let v = validate(&spec);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].hypothesis, Hypothesis::A4);
    }

    #[test]
    fn report_periodic_schedule() {
        let spec =
            SystemSpec::new(1, 10.0).with_impulses(ImpulseSchedule::periodic(1.0, scalar(0.5)));
        let r = hypotheses_report(&spec);
        assert_eq!(r.m, 0.5);
        // shortest admissible segment (2.5) holding three unit-spaced points
        // cannot beat four points on a segment of length 3
        assert!((r.i_hat - 4.0 / 3.0).abs() < 1e-12);
        let long = spec.with_horizon(1000.0);
        let r = hypotheses_report(&long);
        assert!((r.i_hat - 1.0).abs() < 5e-3);
    }

    #[test]
    fn report_without_impulses() {
        let r =
            hypotheses_report(&SystemSpec::new(1, 3.0).with_term(DelayTerm::scalar_lag(2.0, 0.5)));
        assert_eq!(r.m, 0.0);
        assert_eq!(r.i_hat, 0.0);
        assert_eq!(r.delta, 0.5);
        assert_eq!(r.q, 2.0);
    }

    #[test]
    fn report_destabilized_example() {
        let spec = SystemSpec::new(1, 10.0)
            .with_term(DelayTerm::scalar_lag(1.0, 1.0))
            .with_impulses(ImpulseSchedule::periodic(1.0, scalar(-1.0)));
        let r = hypotheses_report(&spec);
        assert_eq!((r.m, r.delta, r.q), (1.0, 1.0, 1.0));
        let frozen = spec.with_term(DelayTerm::scalar_frozen(1.0, 0.0));
        assert!(hypotheses_report(&frozen).delta.is_infinite());
    }

    proptest! {
        #[test]
        fn counting_partitions(
            mut pts in proptest::collection::vec(0.01f64..20.0, 0..12),
            s in 0.0f64..20.0, du in 0.0f64..10.0, dt in 0.0f64..10.0,
        ) {
            pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
            pts.dedup();
            let sched = ImpulseSchedule::explicit(&pts, vec![scalar(1.0); pts.len()]);
            let u = s + du;
            let t = u + dt;
            let tail = pts.iter().filter(|&&p| p > u && p <= t).count();
            prop_assert_eq!(
                count_impulses(&sched, s, t).unwrap(),
                count_impulses(&sched, s, u).unwrap() + tail
            );
        }

        #[test]
        fn delay_never_exceeds_time(theta in 0.0f64..5.0, t in 0.0f64..50.0) {
            prop_assert!(evaluate_delay(&DelayTerm::scalar_lag(1.0, theta), t).unwrap() <= t);
            prop_assert!(evaluate_delay(&DelayTerm::scalar_frozen(1.0, 0.0), t).unwrap() <= t);
        }

        #[test]
        fn m_is_max_row_sum(entries in proptest::collection::vec(-3.0f64..3.0, 12)) {
            let mats: Vec<_> = entries.chunks(4).map(|c| DMatrix::from_row_slice(2, 2, c)).collect();
            let expected = mats.iter().map(|m| {
                (0..2).map(|i| m[(i, 0)].abs() + m[(i, 1)].abs()).fold(0.0, f64::max)
            }).fold(0.0, f64::max);
            let spec = SystemSpec::new(2, 5.0)
                .with_impulses(ImpulseSchedule::explicit(&[1.0, 2.0, 3.0], mats));
            prop_assert_eq!(hypotheses_report(&spec).m, expected);
        }

        #[test]
        fn validate_is_idempotent(theta in -1.0f64..1.0, p in -1.0f64..3.0) {
            let spec = SystemSpec::new(1, 4.0)
                .with_term(DelayTerm::scalar_lag(1.0, theta))
                .with_impulses(ImpulseSchedule::explicit(&[p, 2.0], vec![scalar(1.0); 2]));
            prop_assert_eq!(validate(&spec), validate(&spec));
        }
    }
}
