use thiserror::Error;

use crate::system::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A time argument fell outside the domain where the queried object is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("step size must be positive and finite, got {0}")]
    StepSize(f64),

    #[error("system violates {} hypothesis check(s): {}", .0.len(), summarize(.0))]
    InvalidSystem(Vec<Violation>),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("too few samples: {found} (need at least {needed})")]
    TooFewSamples { found: usize, needed: usize },

    #[error("bound inapplicable: {0}")]
    BoundInapplicable(String),

    #[error("{0}")]
    Config(#[from] crate::config::ConfigError),
}

fn summarize(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
