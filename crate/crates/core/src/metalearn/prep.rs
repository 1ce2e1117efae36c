use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use super::N_CLASSES;

/// Per-column z-scoring fitted on training rows; constant columns keep
/// unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<f64>) -> Self {
        let mean: Vec<f64> = x.axis_iter(Axis(1)).map(|c| exact_mean(c.iter().copied())).collect();
        let scale = x
            .axis_iter(Axis(1))
            .zip(&mean)
            .map(|(col, m)| {
                let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / col.len() as f64;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn row(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn matrix(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.outer_iter_mut() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.scale[j];
            }
        }
        out
    }
}

/// Mean shifted by the first value, so constant inputs give their value
/// exactly and therefore a variance of exactly zero.
pub fn exact_mean(values: impl Iterator<Item = f64>) -> f64 {
    let mut it = values.peekable();
    let Some(&first) = it.peek() else {
        return f64::NAN;
    };
    let (sum, n) = it.fold((0.0, 0usize), |(s, n), v| (s + (v - first), n + 1));
    first + sum / n as f64
}

/// Which of the nine classes occur in a training set, in index order.
pub fn present_classes(y: &[usize]) -> Vec<usize> {
    let mut seen = [false; N_CLASSES];
    for &c in y {
        seen[c] = true;
    }
    (0..N_CLASSES).filter(|&c| seen[c]).collect()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}
