//! Norms used throughout: the max vector norm and the matrix norm it induces.

use nalgebra::{DMatrix, DVector};

/// `max_i |x_i|`; zero for an empty vector.
pub fn vec_norm(x: &DVector<f64>) -> f64 {
    x.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Induced infinity norm: the largest absolute row sum.
pub fn mat_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn all_finite<'a>(values: impl IntoIterator<Item = &'a f64>) -> bool {
    values.into_iter().all(|v| v.is_finite())
}
