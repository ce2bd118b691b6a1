//! # impdde
//!
//! Linear impulsive delay differential equations
//!
//! ```text
//! x'(t) + sum_i A_i(t) x(h_i(t)) = r(t),   x(tau_j) = B_j x(tau_j - 0) + alpha_j
//! ```
//!
//! with constant lags or frozen arguments and piecewise-constant data.
//!
//! - [`system`]: the system description, hypothesis checks and impulse counting.
//! - [`integrator`]: method-of-steps solver with jump handling, and the
//!   fundamental matrix `X(t, s)` of the `s`-curtailed equation.
//! - [`representation`]: variation-of-constants formula and the Cauchy operator
//!   evaluated by quadrature over `X(t, .)`.
//! - [`stability`]: a priori envelope, the ordinary impulsive Cauchy matrix,
//!   the coefficient stability certificate and decay-rate fitting.
//! - [`config`], [`scenario`], [`cli`]: JSON configs, built-in scenarios and the
//!   command-line front end.

// `!(x < y)` is used deliberately so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod integrator;
pub mod linalg;
pub mod output;
pub mod profile;
pub mod representation;
pub mod scenario;
pub mod stability;
pub mod system;

pub use config::load_spec;
pub use error::{Error, Result};
pub use integrator::{
    evaluate, fundamental_grid, fundamental_matrix, solve, solve_with_nodes, uniform_grid,
    FundamentalMatrix, FundamentalSolution, StepControl, Trajectory,
};
pub use profile::{Profile, StepTable};
pub use system::{
    count_impulses, evaluate_delay, hypotheses_report, validate, DelayKind, DelayTerm,
    HypothesesReport, Impulse, ImpulseSchedule, SystemSpec, Violation,
};
