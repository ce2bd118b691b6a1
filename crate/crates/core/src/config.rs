//! JSON configuration files for [`SystemSpec`].
//!
//! ```json
//! {
//!   "dim": 1,
//!   "terms": [
//!     { "coefficient": [[-0.3]], "delay": { "lag": 1.0 } },
//!     { "coefficient": [{ "t": 0.0, "matrix": [[1.0]] }, { "t": 2.0, "matrix": [[0.5]] }],
//!       "delay": { "frozen": 0.0 } }
//!   ],
//!   "impulses": { "period": 1.0, "matrix": [[0.5]], "offset": [0.0] },
//!   "forcing": [1.0],
//!   "phi": [{ "t": -1.0, "value": [0.2] }],
//!   "x0": [1.0],
//!   "horizon": 20.0
//! }
//! ```
//!
//! Matrices are row-major lists of rows. `impulses` is either
//! `{points, matrices, offsets?}` or `{period, matrix, offset?}`; `forcing`,
//! `phi` and `x0` default to zero. Unknown keys are rejected.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profile::{Profile, StepTable};
use crate::system::{DelayKind, DelayTerm, Impulse, ImpulseSchedule, SystemSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column} (field `{field}`): {message}")]
    Parse {
        field: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error in `{field}`: {message}")]
    Schema { field: String, message: String },
}

impl ConfigError {
    fn schema(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Schema {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub dim: usize,
    #[serde(default)]
    pub terms: Vec<TermConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impulses: Option<ImpulsesConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forcing: Option<VectorProfileConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<VectorProfileConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub coefficient: MatrixProfileConfig,
    pub delay: DelayConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum DelayConfig {
    Lag(f64),
    Frozen(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixProfileConfig {
    Constant(Vec<Vec<f64>>),
    Table(Vec<MatrixEntry>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixEntry {
    pub t: f64,
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorProfileConfig {
    Constant(Vec<f64>),
    Table(Vec<VectorEntry>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorEntry {
    pub t: f64,
    pub value: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ImpulsesConfig {
    Explicit {
        points: Vec<f64>,
        matrices: Vec<Vec<Vec<f64>>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offsets: Option<Vec<Vec<f64>>>,
    },
    Periodic {
        period: f64,
        matrix: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<Vec<f64>>,
    },
}

// untagged variants cannot carry deny_unknown_fields, so each shape is
// re-parsed strictly once the variant is known
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct StrictExplicit {
    points: Vec<f64>,
    matrices: Vec<Vec<Vec<f64>>>,
    #[serde(default)]
    offsets: Option<Vec<Vec<f64>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct StrictPeriodic {
    period: f64,
    matrix: Vec<Vec<f64>>,
    #[serde(default)]
    offset: Option<Vec<f64>>,
}

fn matrix_from_rows(field: &str, rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>, ConfigError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        let cols = rows.first().map_or(0, |r| r.len());
        return Err(ConfigError::schema(
            field,
            format!(
                "expected {n}x{n} matrix, got {} rows (first row has {cols} entries)",
                rows.len()
            ),
        ));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn vector_from(field: &str, v: &[f64], n: usize) -> Result<DVector<f64>, ConfigError> {
    if v.len() != n {
        return Err(ConfigError::schema(
            field,
            format!("expected vector of length {n}, got {}", v.len()),
        ));
    }
    Ok(DVector::from_column_slice(v))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix_profile(
    field: &str,
    cfg: &MatrixProfileConfig,
    n: usize,
) -> Result<Profile<DMatrix<f64>>, ConfigError> {
    match cfg {
        MatrixProfileConfig::Constant(rows) => {
            Ok(Profile::Constant(matrix_from_rows(field, rows, n)?))
        }
        MatrixProfileConfig::Table(entries) => {
            let values = entries
                .iter()
                .enumerate()
                .map(|(k, e)| matrix_from_rows(&format!("{field}[{k}].matrix"), &e.matrix, n))
                .collect::<Result<Vec<_>, _>>()?;
            let knots = entries.iter().map(|e| e.t).collect();
            StepTable::new(knots, values)
                .map(Profile::Table)
                .map_err(|e| ConfigError::schema(field, e.to_string()))
        }
    }
}

fn vector_profile(
    field: &str,
    cfg: Option<&VectorProfileConfig>,
    n: usize,
) -> Result<Profile<DVector<f64>>, ConfigError> {
    match cfg {
        None => Ok(Profile::Constant(DVector::zeros(n))),
        Some(VectorProfileConfig::Constant(v)) => Ok(Profile::Constant(vector_from(field, v, n)?)),
        Some(VectorProfileConfig::Table(entries)) => {
            let values = entries
                .iter()
                .enumerate()
                .map(|(k, e)| vector_from(&format!("{field}[{k}].value"), &e.value, n))
                .collect::<Result<Vec<_>, _>>()?;
            let knots = entries.iter().map(|e| e.t).collect();
            StepTable::new(knots, values)
                .map(Profile::Table)
                .map_err(|e| ConfigError::schema(field, e.to_string()))
        }
    }
}

impl SystemConfig {
    pub fn to_spec(&self) -> Result<SystemSpec, ConfigError> {
        let n = self.dim;
        if n == 0 {
            return Err(ConfigError::schema("dim", "must be at least 1"));
        }
        let terms = self
            .terms
            .iter()
            .enumerate()
            .map(|(i, t)| {
                Ok(DelayTerm {
                    coefficient: matrix_profile(
                        &format!("terms[{i}].coefficient"),
                        &t.coefficient,
                        n,
                    )?,
                    delay: match t.delay {
                        DelayConfig::Lag(theta) => DelayKind::Lag(theta),
                        DelayConfig::Frozen(c) => DelayKind::Frozen(c),
                    },
                })
            })
            .collect::<Result<Vec<_>, ConfigError>>()?;
        let impulses = match &self.impulses {
            None => ImpulseSchedule::none(),
            Some(ImpulsesConfig::Explicit {
                points,
                matrices,
                offsets,
            }) => {
                if matrices.len() != points.len() {
                    return Err(ConfigError::schema(
                        "impulses.matrices",
                        format!("{} matrices for {} points", matrices.len(), points.len()),
                    ));
                }
                if let Some(off) = offsets {
                    if off.len() != points.len() {
                        return Err(ConfigError::schema(
                            "impulses.offsets",
                            format!("{} offsets for {} points", off.len(), points.len()),
                        ));
                    }
                }
                let list = points
                    .iter()
                    .enumerate()
                    .map(|(j, &time)| {
                        Ok(Impulse {
                            time,
                            matrix: matrix_from_rows(
                                &format!("impulses.matrices[{j}]"),
                                &matrices[j],
                                n,
                            )?,
                            offset: match offsets {
                                Some(off) => {
                                    vector_from(&format!("impulses.offsets[{j}]"), &off[j], n)?
                                }
                                None => DVector::zeros(n),
                            },
                        })
                    })
                    .collect::<Result<Vec<_>, ConfigError>>()?;
                ImpulseSchedule::Explicit(list)
            }
            Some(ImpulsesConfig::Periodic {
                period,
                matrix,
                offset,
            }) => ImpulseSchedule::Periodic {
                period: *period,
                matrix: matrix_from_rows("impulses.matrix", matrix, n)?,
                offset: match offset {
                    Some(v) => vector_from("impulses.offset", v, n)?,
                    None => DVector::zeros(n),
                },
            },
        };
        let x0 = match &self.x0 {
            Some(v) => vector_from("x0", v, n)?,
            None => DVector::zeros(n),
        };
        Ok(SystemSpec {
            dim: n,
            terms,
            impulses,
            forcing: vector_profile("forcing", self.forcing.as_ref(), n)?,
            phi: vector_profile("phi", self.phi.as_ref(), n)?,
            x0,
            horizon: self.horizon,
        })
    }

    /// Canonical config: every key written explicitly.
    pub fn from_spec(spec: &SystemSpec) -> Self {
        let vec_profile = |p: &Profile<DVector<f64>>| match p {
            Profile::Constant(v) => VectorProfileConfig::Constant(v.iter().copied().collect()),
            Profile::Table(t) => VectorProfileConfig::Table(
                t.entries()
                    .map(|(t, v)| VectorEntry {
                        t,
                        value: v.iter().copied().collect(),
                    })
                    .collect(),
            ),
        };
        let terms = spec
            .terms
            .iter()
            .map(|term| TermConfig {
                coefficient: match &term.coefficient {
                    Profile::Constant(m) => MatrixProfileConfig::Constant(rows_of(m)),
                    Profile::Table(t) => MatrixProfileConfig::Table(
                        t.entries()
                            .map(|(t, m)| MatrixEntry {
                                t,
                                matrix: rows_of(m),
                            })
                            .collect(),
                    ),
                },
                delay: match term.delay {
                    DelayKind::Lag(theta) => DelayConfig::Lag(theta),
                    DelayKind::Frozen(c) => DelayConfig::Frozen(c),
                },
            })
            .collect();
        let impulses = match &spec.impulses {
            ImpulseSchedule::Explicit(list) => ImpulsesConfig::Explicit {
                points: list.iter().map(|i| i.time).collect(),
                matrices: list.iter().map(|i| rows_of(&i.matrix)).collect(),
                offsets: Some(
                    list.iter()
                        .map(|i| i.offset.iter().copied().collect())
                        .collect(),
                ),
            },
            ImpulseSchedule::Periodic {
                period,
                matrix,
                offset,
            } => ImpulsesConfig::Periodic {
                period: *period,
                matrix: rows_of(matrix),
                offset: Some(offset.iter().copied().collect()),
            },
        };
        SystemConfig {
            dim: spec.dim,
            terms,
            impulses: Some(impulses),
            forcing: Some(vec_profile(&spec.forcing)),
            phi: Some(vec_profile(&spec.phi)),
            x0: Some(spec.x0.iter().copied().collect()),
            horizon: spec.horizon,
        }
    }
}

fn strict_impulses(value: &serde_json::Value) -> Result<(), ConfigError> {
    let Some(imp) = value.get("impulses") else {
        return Ok(());
    };
    let res = if imp.get("period").is_some() {
        StrictPeriodic::deserialize(imp).map(|_| ())
    } else {
        StrictExplicit::deserialize(imp).map(|_| ())
    };
    res.map_err(|e| ConfigError::schema("impulses", e.to_string()))
}

/// Deserialize any config-shaped document with field-path diagnostics.
pub(crate) fn parse_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        ConfigError::Parse {
            field,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    de.end().map_err(|e| ConfigError::Parse {
        field: ".".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(value)
}

pub(crate) fn config_from_value(value: &serde_json::Value) -> Result<SystemConfig, ConfigError> {
    strict_impulses(value)?;
    parse_json(&value.to_string())
}

/// Parse a config document into a system.
pub fn parse_spec(text: &str) -> Result<SystemSpec, ConfigError> {
    let cfg: SystemConfig = parse_json(text)?;
    let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse {
        field: ".".into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    strict_impulses(&raw)?;
    cfg.to_spec()
}

pub fn load_spec(path: impl AsRef<Path>) -> Result<SystemSpec, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_spec(&text)
}

/// Canonical JSON text of a system.
pub fn spec_to_json(spec: &SystemSpec) -> String {
    crate::output::to_json(&SystemConfig::from_spec(spec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_config_loads() {
        let spec = parse_spec(
            r#"{"dim": 1, "terms": [{"coefficient": [[1.0]], "delay": {"lag": 1.0}}], "horizon": 5}"#,
        )
        .unwrap();
        assert_eq!(spec.dim, 1);
        assert_eq!(spec.terms[0].delay, DelayKind::Lag(1.0));
        assert!(spec.impulses.is_empty());
        assert_eq!(spec.x0, DVector::zeros(1));
    }

    #[test]
    fn wrong_shape_names_field() {
        let err = parse_spec(
            r#"{"dim": 2, "terms": [{"coefficient": [[1.0, 0.0]], "delay": {"lag": 1.0}}], "horizon": 5}"#,
        )
        .unwrap_err();
        match err {
            ConfigError::Schema { field, .. } => assert_eq!(field, "terms[0].coefficient"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse_spec(r#"{"dim": 1, "horizon": 5, "colour": "red"}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { .. }), "{err}");
        let err = parse_spec(
            r#"{"dim": 1, "horizon": 5, "impulses": {"period": 1, "matrix": [[0.5]], "phase": 0}}"#,
        )
        .unwrap_err();
        assert!(
            matches!(err, ConfigError::Schema { ref field, .. } if field == "impulses"),
            "{err}"
        );
        let err = parse_spec(
            r#"{"dim": 1, "horizon": 5, "terms": [{"coefficient": [[1]], "delay": {"lag": 1, "x": 2}}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("terms[0].delay"), "{err}");
    }

    #[test]
    fn parse_error_reports_position() {
        let err = parse_spec("{\n  \"dim\": 1,\n  \"horizon\": }").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tables_and_periodic_schedule() {
        let spec = parse_spec(
            r#"{
              "dim": 1,
              "terms": [{"coefficient": [{"t": 0, "matrix": [[1]]}, {"t": 2, "matrix": [[3]]}],
                         "delay": {"frozen": 0}}],
              "impulses": {"period": 0.5, "matrix": [[0.25]]},
              "forcing": [{"t": 0, "value": [1]}, {"t": 1, "value": [0]}],
              "phi": [2.0],
              "x0": [1.0],
              "horizon": 3
            }"#,
        )
        .unwrap();
        assert_eq!(spec.terms[0].coefficient.at(2.5)[(0, 0)], 3.0);
        assert_eq!(spec.impulse_events().len(), 6);
        assert_eq!(spec.forcing.at(1.0)[0], 0.0);
    }

    #[test]
    fn canonical_form_is_fixed_point() {
        let text = r#"{"dim": 1, "terms": [{"coefficient": [[1.0]], "delay": {"lag": 0.5}}],
                      "impulses": {"points": [1, 2], "matrices": [[[0.5]], [[-1]]]}, "horizon": 4}"#;
        let once = spec_to_json(&parse_spec(text).unwrap());
        let twice = spec_to_json(&parse_spec(&once).unwrap());
        assert_eq!(once, twice);
    }

    fn arb_spec() -> impl Strategy<Value = SystemSpec> {
        (
            1usize..3,
            proptest::collection::vec((-2.0f64..2.0, 0.0f64..2.0, any::<bool>()), 0..3),
            proptest::collection::vec(0.1f64..5.0, 0..4),
            -1.0f64..1.0,
            prop_oneof![Just(None), (0.1f64..2.0).prop_map(Some)],
        )
            .prop_map(|(n, terms, mut pts, scale, period)| {
                pts.sort_by(f64::total_cmp);
                pts.dedup();
                let mut spec = SystemSpec::new(n, 6.0).with_x0(DVector::from_element(n, scale));
                for (k, (a, theta, table)) in terms.into_iter().enumerate() {
                    let m = DMatrix::from_fn(n, n, |i, j| a * (i + 2 * j + k) as f64 / 3.0);
                    let coefficient = if table {
                        Profile::Table(StepTable::new(vec![0.0, 1.5], vec![m.clone(), -m]).unwrap())
                    } else {
                        Profile::Constant(m)
                    };
                    spec.terms.push(DelayTerm {
                        coefficient,
                        delay: DelayKind::Lag(theta),
                    });
                }
                spec.impulses = match period {
                    Some(p) => ImpulseSchedule::periodic(p, DMatrix::from_element(n, n, scale)),
                    None => ImpulseSchedule::explicit(
                        &pts,
                        pts.iter()
                            .map(|&p| DMatrix::from_element(n, n, p))
                            .collect(),
                    ),
                };
                spec.phi = Profile::Table(
                    StepTable::new(
                        vec![-3.0, -1.0],
                        vec![
                            DVector::from_element(n, 0.5),
                            DVector::from_element(n, scale),
                        ],
                    )
                    .unwrap(),
                );
                spec
            })
    }

    proptest! {
        #[test]
        fn spec_survives_json(spec in arb_spec()) {
            let text = spec_to_json(&spec);
            let back = parse_spec(&text).unwrap();
            prop_assert_eq!(&back, &spec);
            prop_assert_eq!(spec_to_json(&back), text);
        }
    }
}
