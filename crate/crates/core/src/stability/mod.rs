//! Bounds, the stability certificate, and rate fitting for `X(t, s)`.

mod bounds;
mod certificate;
mod rate;

pub use bounds::{c0_closed_form, c0_estimate, c0_gap_bound, gronwall_bound, jump_norm_sup};
pub use certificate::{
    certify, coefficient_condition_lhs, FailureReason, StabilityCertificate, Verdict,
};
pub use rate::{default_window, estimate_rate, fit_log_linear, RateEstimate, MIN_SAMPLES};
