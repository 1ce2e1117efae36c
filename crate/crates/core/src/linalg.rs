//! Thin ndarray <-> nalgebra bridge for the few dense decompositions the
//! pipeline needs.

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

pub fn to_dmatrix(a: ArrayView2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_dmatrix(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Eigen-decomposition of a symmetric matrix. Eigenvalues are returned in
/// descending order; column `k` of the second value is the matching unit
/// eigenvector.
pub fn symmetric_eigen(a: ArrayView2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let eig = to_dmatrix(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Sample covariance (denominator `n - 1`, or `n` when only one row exists).
pub fn covariance(x: ArrayView2<f64>) -> Array2<f64> {
    let n = x.nrows();
    let mean = x.mean_axis(Axis(0)).unwrap_or_else(|| Array1::zeros(x.ncols()));
    let centered = &x - &mean;
    let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
    centered.t().dot(&centered) / denom
}

/// Solves `a x = b` for symmetric positive definite `a`.
pub fn cholesky_solve(a: ArrayView2<f64>, b: ArrayView1<f64>) -> Option<Array1<f64>> {
    let chol = to_dmatrix(a).cholesky()?;
    let rhs = DVector::from_iterator(b.len(), b.iter().copied());
    let x = chol.solve(&rhs);
    Some(Array1::from_iter(x.iter().copied()))
}

/// Solves `a x = b` with partial-pivot LU. `None` when `a` is singular.
pub fn lu_solve(a: ArrayView2<f64>, b: ArrayView1<f64>) -> Option<Array1<f64>> {
    let rhs = DVector::from_iterator(b.len(), b.iter().copied());
    let x = to_dmatrix(a).lu().solve(&rhs)?;
    if x.iter().all(|v| v.is_finite()) {
        Some(Array1::from_iter(x.iter().copied()))
    } else {
        None
    }
}

pub fn min_eigenvalue(a: ArrayView2<f64>) -> f64 {
    let (vals, _) = symmetric_eigen(a);
    vals.last().copied().unwrap_or(0.0)
}
