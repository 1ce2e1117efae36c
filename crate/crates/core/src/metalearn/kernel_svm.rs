//! One-vs-rest soft-margin SVMs with linear, RBF and sigmoid kernels.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::prep::{present_classes, Standardizer};
use super::{ClassScores, N_CLASSES};
use crate::svm;

const C: f64 = 1.0;
const EPS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    Linear,
    Rbf { gamma: f64 },
    Sigmoid { gamma: f64 },
}

impl Kernel {
    fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Kernel::Linear => dot(a, b),
            Kernel::Rbf { gamma } => {
                let d: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
                (-gamma * d).exp()
            }
            Kernel::Sigmoid { gamma } => (gamma * dot(a, b)).tanh(),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Linear,
    Rbf,
    Sigmoid,
}

/// `1 / (d * Var(X))` over all entries; 1 when the data has no spread.
fn gamma_scale(x: ArrayView2<f64>) -> f64 {
    let n = x.len() as f64;
    let mean = x.sum() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var > 0.0 {
        1.0 / (x.ncols() as f64 * var)
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMachine {
    pub class: usize,
    /// `alpha_i * y_i` for every training row.
    pub coef: Vec<f64>,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvrSvm {
    pub kernel: Kernel,
    pub scaler: Standardizer,
    pub support: Array2<f64>,
    pub machines: Vec<BinaryMachine>,
}

impl OvrSvm {
    pub fn fit(x: ArrayView2<f64>, y: &[usize], kind: KernelKind) -> Self {
        let scaler = Standardizer::fit(x);
        let xs = scaler.matrix(x);
        let kernel = match kind {
            KernelKind::Linear => Kernel::Linear,
            KernelKind::Rbf => Kernel::Rbf {
                gamma: gamma_scale(xs.view()),
            },
            KernelKind::Sigmoid => Kernel::Sigmoid {
                gamma: gamma_scale(xs.view()),
            },
        };
        let n = y.len();
        let rows: Vec<&[f64]> = xs.outer_iter().map(|r| r.to_slice().expect("standard layout")).collect();
        let k = Array2::from_shape_fn((n, n), |(i, j)| kernel.eval(rows[i], rows[j]));
        let machines = present_classes(y)
            .into_iter()
            .map(|c| {
                let ys: Vec<f64> = y.iter().map(|&l| if l == c { 1.0 } else { -1.0 }).collect();
                let sol = svm::solve(k.view(), &ys, C, EPS);
                if !sol.converged {
                    log::warn!("one-vs-rest SVM for class {c} hit the iteration cap");
                }
                BinaryMachine {
                    class: c,
                    coef: sol.alpha.iter().zip(&ys).map(|(a, s)| a * s).collect(),
                    rho: sol.rho,
                }
            })
            .collect();
        OvrSvm {
            kernel,
            scaler,
            support: xs,
            machines,
        }
    }

    pub fn scores(&self, x: &[f64]) -> ClassScores {
        let q = self.scaler.row(x);
        let kq: Vec<f64> = self
            .support
            .outer_iter()
            .map(|r| self.kernel.eval(r.to_slice().expect("standard layout"), &q))
            .collect();
        let mut out = [None; N_CLASSES];
        for m in &self.machines {
            out[m.class] = Some(m.coef.iter().zip(&kq).map(|(c, k)| c * k).sum::<f64>() - m.rho);
        }
        out
    }
}
