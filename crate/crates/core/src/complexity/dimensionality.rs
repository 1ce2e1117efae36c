//! Dimensionality measures: T2, T3, T4 and the participation ratio.

use super::Prepared;
use crate::linalg;

const VARIANCE_KEPT: f64 = 0.95;

/// Number of principal components needed to explain 95% of the variance.
fn pca_components(p: &Prepared) -> usize {
    let cov = linalg::covariance(p.x.view());
    let (values, _) = linalg::symmetric_eigen(cov.view());
    let values: Vec<f64> = values.into_iter().map(|v| v.max(0.0)).collect();
    let total: f64 = values.iter().sum();
    if total <= 0.0 {
        return 1;
    }
    let mut acc = 0.0;
    for (k, v) in values.iter().enumerate() {
        acc += v;
        if acc >= VARIANCE_KEPT * total - 1e-12 * total {
            return k + 1;
        }
    }
    values.len()
}

pub(super) fn sparsity(p: &Prepared) -> [f64; 3] {
    let (n, d) = (p.n() as f64, p.d() as f64);
    let m = pca_components(p) as f64;
    [d / n, m / n, m / d]
}

/// `tr(C)^2 / ||C||_F^2`, which equals `(sum l)^2 / sum l^2` over the
/// covariance eigenvalues.
pub(super) fn participation_ratio(p: &Prepared) -> f64 {
    let cov = linalg::covariance(p.x.view());
    let trace: f64 = cov.diag().sum();
    let frob: f64 = cov.iter().map(|v| v * v).sum();
    if trace <= 0.0 || frob <= 0.0 {
        return 1.0;
    }
    (trace * trace / frob).clamp(1.0, p.d() as f64)
}
