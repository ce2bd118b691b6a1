//! A priori envelope of the fundamental matrix and the Cauchy matrix of
//! the pure-jump equation `x' = -a x`, `x(tau) = B x(tau - 0)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::mat_norm;
use crate::system::{ImpulseSchedule, SystemSpec};

fn check_order(s: f64, t: f64) -> Result<()> {
    if s > t || s.is_nan() || t.is_nan() {
        Err(Error::Domain(format!("need s <= t, got s = {s}, t = {t}")))
    } else {
        Ok(())
    }
}

/// `prod_{s < tau <= t} (1 + |B|) * exp(int_s^t sum_k |A_k|)`, an upper
/// bound for `|X(t, s)|`.
///
/// With `tight` the factors are `|B|` instead; that form needs every jump
/// matrix in `(s, t]` to be nonzero and is only guaranteed without delays.
pub fn gronwall_bound(spec: &SystemSpec, s: f64, t: f64, tight: bool) -> Result<f64> {
    check_order(s, t)?;
    if s < 0.0 || t > spec.horizon {
        return Err(Error::Domain(format!(
            "[{s}, {t}] not inside [0, {}]",
            spec.horizon
        )));
    }
    let mut product = 1.0;
    for imp in spec.impulses.events(t) {
        if imp.time <= s {
            continue;
        }
        let norm = mat_norm(&imp.matrix);
        if tight {
            if norm == 0.0 {
                return Err(Error::BoundInapplicable(format!(
                    "jump matrix at {} is zero",
                    imp.time
                )));
            }
            product *= norm;
        } else {
            product *= 1.0 + norm;
        }
    }
    Ok(product * spec.coefficient_norm_integral(s, t).exp())
}

/// `exp(-a (t - s)) * B_last ... B_first` over the jumps in `(s, t]`.
pub fn c0_closed_form(
    a: f64,
    schedule: &ImpulseSchedule,
    dim: usize,
    s: f64,
    t: f64,
) -> Result<DMatrix<f64>> {
    check_order(s, t)?;
    let mut product = DMatrix::identity(dim, dim);
    for imp in schedule.events(t) {
        if imp.time > s {
            if imp.matrix.nrows() != dim || imp.matrix.ncols() != dim {
                return Err(Error::Argument(format!(
                    "jump matrix at {} is not {dim}x{dim}",
                    imp.time
                )));
            }
            product = &imp.matrix * product;
        }
    }
    Ok(product * (-a * (t - s)).exp())
}

/// `sup_j |B_j|` over the whole schedule (for periodic schedules, the one matrix).
pub fn jump_norm_sup(schedule: &ImpulseSchedule) -> f64 {
    match schedule {
        ImpulseSchedule::Explicit(list) => list
            .iter()
            .map(|imp| mat_norm(&imp.matrix))
            .fold(0.0, f64::max),
        ImpulseSchedule::Periodic { matrix, .. } => mat_norm(matrix),
    }
}

/// The published estimate for the pure-jump Cauchy matrix (`a = 0`):
/// `exp(-alpha (t - s))` when `t - s > rho`, else 1, with
/// `alpha = -ln(gamma) / zeta`.
///
/// This is the estimate as stated. It can be violated: `(s, t]` may hold
/// only `floor((t - s) / rho)` jumps rather than `(t - s) / zeta`; see
/// [`c0_gap_bound`] for the form that always holds.
pub fn c0_estimate(schedule: &ImpulseSchedule, s: f64, t: f64, zeta: f64, rho: f64) -> Result<f64> {
    check_order(s, t)?;
    if !(zeta > 0.0 && rho >= zeta) {
        return Err(Error::Argument(format!(
            "need 0 < zeta <= rho, got {zeta}, {rho}"
        )));
    }
    let gamma = jump_norm_sup(schedule);
    if gamma >= 1.0 {
        return Err(Error::BoundInapplicable(format!(
            "sup |B| = {gamma} is not < 1"
        )));
    }
    if t - s <= rho {
        return Ok(1.0);
    }
    let alpha = -gamma.ln() / zeta;
    Ok((-alpha * (t - s)).exp())
}

/// `gamma^floor((t - s) / rho)`: with gaps at most `rho` (and the first jump
/// no later than `rho`), `(s, t]` holds at least that many jumps.
pub fn c0_gap_bound(gamma: f64, rho: f64, s: f64, t: f64) -> Result<f64> {
    check_order(s, t)?;
    if !(rho > 0.0) {
        return Err(Error::Argument(format!("rho must be positive, got {rho}")));
    }
    if gamma >= 1.0 {
        return Err(Error::BoundInapplicable(format!(
            "sup |B| = {gamma} is not < 1"
        )));
    }
    Ok(gamma.powi(((t - s) / rho).floor() as i32))
}
