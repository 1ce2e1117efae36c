//! Linear separability measures: L1, L2, L3.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use super::Prepared;
use crate::svm;

const C: f64 = 1.0;
const EPS: f64 = 1e-6;

/// Soft-margin linear SVM fitted in the dual.
#[derive(Debug, Clone)]
pub struct LinearSvm {
    pub w: Array1<f64>,
    pub b: f64,
}

impl LinearSvm {
    /// Fits on labels in {0, 1}; class 1 is the positive side.
    pub fn fit(x: ArrayView2<f64>, y: &[u8]) -> Self {
        let ys: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let k: Array2<f64> = x.dot(&x.t());
        let sol = svm::solve(k.view(), &ys, C, EPS);
        let mut w = Array1::zeros(x.ncols());
        for (i, (&a, &yi)) in sol.alpha.iter().zip(&ys).enumerate() {
            if a > 0.0 {
                w.scaled_add(a * yi, &x.row(i));
            }
        }
        LinearSvm { w, b: -sol.rho }
    }

    pub fn decision(&self, x: ArrayView1<f64>) -> f64 {
        self.w.dot(&x) + self.b
    }

    pub fn predict(&self, x: ArrayView1<f64>) -> u8 {
        u8::from(self.decision(x) > 0.0)
    }

    pub fn error_rate(&self, x: ArrayView2<f64>, y: &[u8]) -> f64 {
        let wrong = x
            .outer_iter()
            .zip(y)
            .filter(|(row, &l)| self.predict(*row) != l)
            .count();
        wrong as f64 / y.len() as f64
    }
}

pub(super) fn compute(p: &Prepared) -> [f64; 3] {
    let model = LinearSvm::fit(p.x.view(), &p.y);
    let norm = model.w.dot(&model.w).sqrt();
    let mut error_dist = 0.0;
    let mut any_wrong = false;
    for (row, &l) in p.x.outer_iter().zip(&p.y) {
        if model.predict(row) != l {
            any_wrong = true;
            if norm > 1e-12 {
                error_dist += model.decision(row).abs() / norm;
            }
        }
    }
    let l1 = if norm <= 1e-12 && any_wrong {
        1.0
    } else {
        let s = error_dist / p.n() as f64;
        s / (1.0 + s)
    };
    let l2 = model.error_rate(p.x.view(), &p.y);
    let (xi, yi) = p.interpolated();
    let l3 = model.error_rate(xi.view(), &yi);
    [l1, l2, l3]
}
