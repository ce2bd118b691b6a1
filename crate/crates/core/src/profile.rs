//! Time-dependent data that is either constant or a right-continuous step function.

use crate::error::{Error, Result};

/// A right-continuous step function: `values[k]` holds on `[knots[k], knots[k+1])`.
///
/// Queries before the first knot return the first value, queries after the
/// last knot return the last value.
#[derive(Debug, Clone, PartialEq)]
pub struct StepTable<T> {
    knots: Vec<f64>,
    values: Vec<T>,
}

impl<T> StepTable<T> {
    pub fn new(knots: Vec<f64>, values: Vec<T>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Argument(
                "step table needs at least one entry".into(),
            ));
        }
        if knots.len() != values.len() {
            return Err(Error::Argument(format!(
                "step table has {} knots but {} values",
                knots.len(),
                values.len()
            )));
        }
        if knots.iter().any(|t| !t.is_finite()) {
            return Err(Error::Argument("step table knots must be finite".into()));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument(
                "step table knots must be strictly increasing".into(),
            ));
        }
        Ok(Self { knots, values })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn entries(&self) -> impl Iterator<Item = (f64, &T)> {
        self.knots.iter().copied().zip(self.values.iter())
    }

    fn index_at(&self, t: f64) -> usize {
        self.knots.partition_point(|&k| k <= t).saturating_sub(1)
    }

    pub fn at(&self, t: f64) -> &T {
        &self.values[self.index_at(t)]
    }

    /// Left limit `f(t - 0)`.
    pub fn at_left(&self, t: f64) -> &T {
        let idx = self.knots.partition_point(|&k| k < t).saturating_sub(1);
        &self.values[idx]
    }

    /// Exact integral over `[a, b]` of `weight(value)`.
    pub fn integrate_by(&self, a: f64, b: f64, weight: impl Fn(&T) -> f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let mut total = 0.0;
        let mut lo = a;
        let mut idx = self.index_at(a);
        while lo < b {
            let hi = self
                .knots
                .get(idx + 1)
                .copied()
                .map_or(b, |next| next.min(b));
            total += (hi - lo) * weight(&self.values[idx]);
            lo = hi;
            idx += 1;
        }
        total
    }
}

/// Coefficient, forcing or initial-function data.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile<T> {
    Constant(T),
    Table(StepTable<T>),
}

impl<T> Profile<T> {
    pub fn at(&self, t: f64) -> &T {
        match self {
            Profile::Constant(v) => v,
            Profile::Table(table) => table.at(t),
        }
    }

    pub fn at_left(&self, t: f64) -> &T {
        match self {
            Profile::Constant(v) => v,
            Profile::Table(table) => table.at_left(t),
        }
    }

    /// Points where the profile may jump; empty for constants.
    pub fn knots(&self) -> &[f64] {
        match self {
            Profile::Constant(_) => &[],
            Profile::Table(table) => table.knots(),
        }
    }

    pub fn values(&self) -> &[T] {
        match self {
            Profile::Constant(v) => std::slice::from_ref(v),
            Profile::Table(table) => table.values(),
        }
    }

    /// Exact supremum of `weight` over `[a, b]`.
    pub fn sup_on(&self, a: f64, b: f64, weight: impl Fn(&T) -> f64) -> f64 {
        match self {
            Profile::Constant(v) => weight(v),
            Profile::Table(table) => {
                let first = table.index_at(a);
                let last = table.index_at(b);
                table.values[first..=last]
                    .iter()
                    .map(weight)
                    .fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    pub fn integrate_by(&self, a: f64, b: f64, weight: impl Fn(&T) -> f64) -> f64 {
        match self {
            Profile::Constant(v) => (b - a).max(0.0) * weight(v),
            Profile::Table(table) => table.integrate_by(a, b, weight),
        }
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Profile<U> {
        match self {
            Profile::Constant(v) => Profile::Constant(f(v)),
            Profile::Table(table) => Profile::Table(StepTable {
                knots: table.knots.clone(),
                values: table.values.iter().map(f).collect(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> StepTable<f64> {
        StepTable::new(vec![0.0, 1.0, 2.5], vec![1.0, -3.0, 2.0]).unwrap()
    }

    #[test]
    fn lookups_are_right_continuous() {
        let t = table();
        assert_eq!(*t.at(-1.0), 1.0);
        assert_eq!(*t.at(0.999), 1.0);
        assert_eq!(*t.at(1.0), -3.0);
        assert_eq!(*t.at_left(1.0), 1.0);
        assert_eq!(*t.at(10.0), 2.0);
    }

    #[test]
    fn integral_is_exact() {
        let t = table();
        let got = t.integrate_by(0.5, 3.0, |v| v.abs());
        assert!((got - (0.5 * 1.0 + 1.5 * 3.0 + 0.5 * 2.0)).abs() < 1e-15);
        assert_eq!(t.integrate_by(2.0, 2.0, |v| *v), 0.0);
    }

    #[test]
    fn sup_restricted_to_interval() {
        let p = Profile::Table(table());
        assert_eq!(p.sup_on(0.0, 0.9, |v| v.abs()), 1.0);
        assert_eq!(p.sup_on(0.0, 1.0, |v| v.abs()), 3.0);
        assert_eq!(p.sup_on(2.6, 9.0, |v| v.abs()), 2.0);
    }

    #[test]
    fn rejects_unsorted_knots() {
        assert!(StepTable::new(vec![0.0, 0.0], vec![1.0, 2.0]).is_err());
        assert!(StepTable::<f64>::new(vec![], vec![]).is_err());
    }
}
