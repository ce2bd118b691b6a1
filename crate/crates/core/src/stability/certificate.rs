//! Sufficient coefficient test for exponential stability under contracting jumps.
//!
//! With `gamma = sup |B_j| < 1`, jump gaps in `[zeta, rho]` and
//! `alpha = -ln(gamma) / zeta`, the system is exponentially stable when
//!
//! ```text
//! sum_k sup_t |A_k(t)| * (exp(-alpha rho) / alpha + rho) < 1.
//! ```
//!
//! Failing the test says nothing about instability.

use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::linalg::mat_norm;
use crate::system::{validate, ImpulseSchedule, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Certified,
    NotCertified,
}

/// Why a certificate was withheld.
#[derive(Debug, Clone, PartialEq)]
pub enum FailureReason {
    HypothesesViolated(Vec<String>),
    TooFewImpulses(usize),
    GammaNotBelowOne(f64),
    CoefficientSumTooLarge(f64),
    UnboundedDelay,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::HypothesesViolated(v) => {
                write!(f, "hypotheses violated: {}", v.join("; "))
            }
            FailureReason::TooFewImpulses(k) => {
                write!(f, "need at least two impulses to bound the gaps, found {k}")
            }
            FailureReason::GammaNotBelowOne(g) => write!(f, "gamma not < 1 (gamma = {g})"),
            FailureReason::CoefficientSumTooLarge(l) => {
                write!(f, "coefficient condition fails: lhs = {l} >= 1")
            }
            FailureReason::UnboundedDelay => f.write_str("delay not bounded (frozen argument)"),
        }
    }
}

impl Serialize for FailureReason {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Inputs, derived constants and verdict of the stability test.
///
/// `alpha` and `lhs` are `None` where undefined (no gaps, `gamma >= 1`);
/// with `gamma = 0`, `alpha` is infinite (serialized as `null`) and
/// `lhs = sum_k sup |A_k| * rho`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityCertificate {
    pub gamma: f64,
    pub zeta: Option<f64>,
    pub rho: Option<f64>,
    pub alpha: Option<f64>,
    pub lhs: Option<f64>,
    pub delta: f64,
    pub verdict: Verdict,
    pub reasons: Vec<FailureReason>,
}

impl StabilityCertificate {
    pub fn is_certified(&self) -> bool {
        self.verdict == Verdict::Certified
    }
}

/// `sum_k s_k * (exp(-alpha rho) / alpha + rho)`; the `alpha -> inf` limit is `sum * rho`.
pub fn coefficient_condition_lhs(sup_sum: f64, alpha: f64, rho: f64) -> f64 {
    if alpha.is_infinite() {
        sup_sum * rho
    } else {
        sup_sum * ((-alpha * rho).exp() / alpha + rho)
    }
}

/// `(zeta, rho, gamma)` of the jumps realised on the horizon.
fn gaps(spec: &SystemSpec) -> (Option<(f64, f64)>, f64, usize) {
    match &spec.impulses {
        ImpulseSchedule::Periodic { period, matrix, .. } => {
            (Some((*period, *period)), mat_norm(matrix), usize::MAX)
        }
        ImpulseSchedule::Explicit(list) => {
            let gamma = list.iter().map(|i| mat_norm(&i.matrix)).fold(0.0, f64::max);
            let times: Vec<f64> = list.iter().map(|i| i.time).collect();
            if times.len() < 2 {
                return (None, gamma, times.len());
            }
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for w in times.windows(2) {
                lo = lo.min(w[1] - w[0]);
                hi = hi.max(w[1] - w[0]);
            }
            (Some((lo, hi)), gamma, times.len())
        }
    }
}

pub fn certify(spec: &SystemSpec) -> StabilityCertificate {
    let mut reasons = Vec::new();
    let violations = validate(spec);
    if !violations.is_empty() {
        reasons.push(FailureReason::HypothesesViolated(
            violations.iter().map(ToString::to_string).collect(),
        ));
    }
    let delta = spec.max_delay();
    if !delta.is_finite() {
        reasons.push(FailureReason::UnboundedDelay);
    }
    let (gap_range, gamma, count) = gaps(spec);
    let (zeta, rho) = match gap_range {
        Some((z, r)) => (Some(z), Some(r)),
        None => {
            reasons.push(FailureReason::TooFewImpulses(count));
            (None, None)
        }
    };
    if !(gamma < 1.0) {
        reasons.push(FailureReason::GammaNotBelowOne(gamma));
    }
    let (alpha, lhs) = match (zeta, rho) {
        (Some(z), Some(r)) if gamma < 1.0 && z > 0.0 => {
            let alpha = -gamma.ln() / z;
            let lhs = coefficient_condition_lhs(spec.coefficient_sup_sum(), alpha, r);
            if !(lhs < 1.0) {
                reasons.push(FailureReason::CoefficientSumTooLarge(lhs));
            }
            (Some(alpha), Some(lhs))
        }
        _ => (None, None),
    };
    let verdict = if reasons.is_empty() {
        Verdict::Certified
    } else {
        Verdict::NotCertified
    };
    StabilityCertificate {
        gamma,
        zeta,
        rho,
        alpha,
        lhs,
        delta,
        verdict,
        reasons,
    }
}
