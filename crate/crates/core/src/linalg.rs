//! Small dense helpers on top of nalgebra.

use nalgebra::DMatrix;

/// Builds a matrix whose columns are the given vectors.
pub fn from_columns(columns: &[Vec<f64>]) -> DMatrix<f64> {
    let rows = columns.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i])
}

/// Numerical rank: singular values at or below `tol * sigma_max` count as zero.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let sv = singular_values(m);
    let max = sv.first().copied().unwrap_or(0.0);
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * max).count()
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn determinant(m: &DMatrix<f64>) -> f64 {
    m.clone().determinant()
}

/// Product of column norms; the Hadamard bound on `|det|`.
pub fn hadamard_scale(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.norm()).product()
}

pub fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - b[0] * (a[1] * c[2] - a[2] * c[1])
        + c[0] * (a[1] * b[2] - a[2] * b[1])
}

pub fn norm3(v: [f64; 3]) -> f64 {
    dot3(v, v).sqrt()
}

pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
