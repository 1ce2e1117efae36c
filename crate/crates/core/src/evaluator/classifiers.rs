//! Kernel classifiers on precomputed Gram matrices.

use nalgebra::{Cholesky, DMatrix, DVector};
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::svm::{self, SmoSolution};
use crate::{Error, Result};

pub const SVC_C: f64 = 1.0;
pub const SVC_EPS: f64 = 1e-6;
pub const KRC_ALPHA: f64 = 1.0;
pub const GPC_TOL: f64 = 1e-6;
pub const GPC_MAX_ITER: usize = 100;
const JITTER: f64 = 1e-8;
const JITTER_ATTEMPTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KernelClassifier {
    SVC,
    GPC,
    KRC,
}

impl KernelClassifier {
    pub const ALL: [KernelClassifier; 3] =
        [KernelClassifier::SVC, KernelClassifier::GPC, KernelClassifier::KRC];

    pub fn as_str(self) -> &'static str {
        match self {
            KernelClassifier::SVC => "SVC",
            KernelClassifier::GPC => "GPC",
            KernelClassifier::KRC => "KRC",
        }
    }

    /// Trains on `k_train` and returns accuracy on the test rows of `k_test`
    /// (test x train).
    pub fn train_predict(
        self,
        k_train: ArrayView2<f64>,
        y: &[u8],
        k_test: ArrayView2<f64>,
        y_test: &[u8],
    ) -> Result<f64> {
        match self {
            KernelClassifier::SVC => svc_train_predict(k_train, y, k_test, y_test),
            KernelClassifier::GPC => gpc_train_predict(k_train, y, k_test, y_test),
            KernelClassifier::KRC => krc_train_predict(k_train, y, k_test, y_test),
        }
    }
}

pub(crate) fn signed(y: &[u8]) -> Vec<f64> {
    y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect()
}

fn check_shapes(k_train: ArrayView2<f64>, y: &[u8], k_test: ArrayView2<f64>, y_test: &[u8]) -> Result<()> {
    let n = y.len();
    if k_train.dim() != (n, n) || k_test.ncols() != n || k_test.nrows() != y_test.len() {
        return Err(Error::Dimension(format!(
            "train Gram {:?}, {} labels, test Gram {:?}, {} test labels",
            k_train.dim(),
            n,
            k_test.dim(),
            y_test.len()
        )));
    }
    Ok(())
}

/// Fraction of test rows whose decision value lands on the right side.
/// A decision of exactly zero predicts class 0.
fn accuracy(decisions: impl Iterator<Item = f64>, y_test: &[u8]) -> f64 {
    if y_test.is_empty() {
        return 0.0;
    }
    let correct = decisions
        .zip(y_test)
        .filter(|(f, &l)| u8::from(*f > 0.0) == l)
        .count();
    correct as f64 / y_test.len() as f64
}

/// Accuracy of always predicting the training majority (class 0 on ties).
pub fn majority_accuracy(y: &[u8], y_test: &[u8]) -> f64 {
    let ones = y.iter().filter(|&&l| l == 1).count();
    let guess = u8::from(2 * ones > y.len());
    if y_test.is_empty() {
        return 0.0;
    }
    y_test.iter().filter(|&&l| l == guess).count() as f64 / y_test.len() as f64
}

/// Soft-margin SVM dual solution on a precomputed kernel.
pub fn svc_fit(k_train: ArrayView2<f64>, y: &[u8]) -> Result<SmoSolution> {
    let sol = svm::solve(k_train, &signed(y), SVC_C, SVC_EPS);
    if !sol.converged {
        return Err(Error::Numerical(format!(
            "SMO did not converge after {} iterations",
            sol.iterations
        )));
    }
    Ok(sol)
}

pub fn svc_train_predict(
    k_train: ArrayView2<f64>,
    y: &[u8],
    k_test: ArrayView2<f64>,
    y_test: &[u8],
) -> Result<f64> {
    check_shapes(k_train, y, k_test, y_test)?;
    let sol = svc_fit(k_train, y)?;
    let ys = signed(y);
    Ok(accuracy(
        k_test.outer_iter().map(|row| sol.decision(&ys, row.iter().copied())),
        y_test,
    ))
}

fn to_dmatrix(k: ArrayView2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(k.nrows(), k.ncols(), |i, j| k[[i, j]])
}

fn cholesky_with_jitter(m: DMatrix<f64>) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let n = m.nrows();
    let mut jitter = 0.0;
    for attempt in 0..=JITTER_ATTEMPTS {
        let trial = &m + DMatrix::<f64>::identity(n, n) * jitter;
        if let Some(c) = trial.cholesky() {
            if attempt > 0 {
                log::warn!("cholesky needed jitter {jitter:e}");
            }
            return Ok(c);
        }
        jitter = if jitter == 0.0 { JITTER } else { jitter * 10.0 };
    }
    Err(Error::Numerical("Cholesky factorization failed after jitter".into()))
}

/// Dual coefficients of kernel ridge classification: `(K + alpha I) a = y`.
pub fn krc_coefficients(k_train: ArrayView2<f64>, y: &[u8], alpha: f64) -> Result<Vec<f64>> {
    let n = y.len();
    let m = to_dmatrix(k_train) + DMatrix::<f64>::identity(n, n) * alpha;
    let chol = cholesky_with_jitter(m)?;
    let a = chol.solve(&DVector::from_vec(signed(y)));
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("ridge system is singular".into()));
    }
    Ok(a.iter().copied().collect())
}

pub fn krc_train_predict(
    k_train: ArrayView2<f64>,
    y: &[u8],
    k_test: ArrayView2<f64>,
    y_test: &[u8],
) -> Result<f64> {
    check_shapes(k_train, y, k_test, y_test)?;
    let a = krc_coefficients(k_train, y, KRC_ALPHA)?;
    Ok(accuracy(
        k_test.outer_iter().map(|row| row.iter().zip(&a).map(|(k, c)| k * c).sum()),
        y_test,
    ))
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Laplace approximation to a GP classifier with logistic likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct GpcMode {
    /// Posterior mode of the latent function at the training points.
    pub f: Vec<f64>,
    /// `grad log p(y | f)` at the mode; test latent means are `k_* . grad`.
    pub grad: Vec<f64>,
    pub iterations: usize,
}

/// Newton iterations for the posterior mode.
pub fn gpc_fit(k_train: ArrayView2<f64>, y: &[u8]) -> Result<GpcMode> {
    let n = y.len();
    let k = to_dmatrix(k_train);
    let t = DVector::from_iterator(n, y.iter().map(|&l| f64::from(l)));
    let mut f = DVector::<f64>::zeros(n);
    for iter in 1..=GPC_MAX_ITER {
        let pi = f.map(sigmoid);
        let grad = &t - &pi;
        let w = pi.map(|p| p * (1.0 - p));
        let sw = w.map(f64::sqrt);
        let b_mat = DMatrix::<f64>::identity(n, n)
            + DMatrix::from_fn(n, n, |i, j| sw[i] * k[(i, j)] * sw[j]);
        let chol = cholesky_with_jitter(b_mat)?;
        let b = w.component_mul(&f) + &grad;
        let kb = &k * &b;
        let inner = chol.solve(&sw.component_mul(&kb));
        let a = &b - sw.component_mul(&inner);
        f = &k * &a;
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("Laplace iteration diverged".into()));
        }
        // gradient of the log posterior at the new mode estimate
        let g_new = (&t - f.map(sigmoid)) - &a;
        if g_new.norm() <= GPC_TOL {
            let grad = &t - f.map(sigmoid);
            return Ok(GpcMode {
                f: f.iter().copied().collect(),
                grad: grad.iter().copied().collect(),
                iterations: iter,
            });
        }
    }
    Err(Error::Numerical(format!(
        "Laplace mode not found in {GPC_MAX_ITER} iterations"
    )))
}

pub fn gpc_train_predict(
    k_train: ArrayView2<f64>,
    y: &[u8],
    k_test: ArrayView2<f64>,
    y_test: &[u8],
) -> Result<f64> {
    check_shapes(k_train, y, k_test, y_test)?;
    let mode = gpc_fit(k_train, y)?;
    Ok(accuracy(
        k_test
            .outer_iter()
            .map(|row| row.iter().zip(&mode.grad).map(|(k, g)| k * g).sum()),
        y_test,
    ))
}
