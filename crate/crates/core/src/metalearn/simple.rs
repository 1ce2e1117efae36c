//! Instance, centroid and probabilistic classifiers: KNN, nearest centroid,
//! Gaussian naive Bayes and multinomial logistic regression.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use super::prep::{exact_mean, present_classes, squared_distance, Standardizer};
use super::{ClassScores, N_CLASSES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub scaler: Standardizer,
    pub x: Array2<f64>,
    pub y: Vec<usize>,
    pub classes: Vec<usize>,
}

impl Knn {
    pub fn fit(x: ArrayView2<f64>, y: &[usize], k: usize) -> Self {
        let scaler = Standardizer::fit(x);
        Knn {
            k: k.min(y.len()),
            x: scaler.matrix(x),
            scaler,
            y: y.to_vec(),
            classes: present_classes(y),
        }
    }

    /// Fraction of the k nearest neighbours in each class; distance ties
    /// resolve by training order.
    pub fn scores(&self, x: &[f64]) -> ClassScores {
        let q = self.scaler.row(x);
        let mut d: Vec<(f64, usize)> = self
            .x
            .outer_iter()
            .enumerate()
            .map(|(i, r)| (squared_distance(r.as_slice().expect("standard layout"), &q), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = [0.0; N_CLASSES];
        for &(_, i) in d.iter().take(self.k) {
            votes[self.y[i]] += 1.0 / self.k as f64;
        }
        let mut out = [None; N_CLASSES];
        for &c in &self.classes {
            out[c] = Some(votes[c]);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearestCentroid {
    pub scaler: Standardizer,
    pub centroids: Vec<(usize, Vec<f64>)>,
}

impl NearestCentroid {
    pub fn fit(x: ArrayView2<f64>, y: &[usize]) -> Self {
        let scaler = Standardizer::fit(x);
        let xs = scaler.matrix(x);
        let centroids = present_classes(y)
            .into_iter()
            .map(|c| {
                let rows: Vec<usize> = (0..y.len()).filter(|&i| y[i] == c).collect();
                let mean = (0..xs.ncols())
                    .map(|j| exact_mean(rows.iter().map(|&i| xs[[i, j]])))
                    .collect();
                (c, mean)
            })
            .collect();
        NearestCentroid { scaler, centroids }
    }

    /// Negative Euclidean distance to each class centroid.
    pub fn scores(&self, x: &[f64]) -> ClassScores {
        let q = self.scaler.row(x);
        let mut out = [None; N_CLASSES];
        for (c, m) in &self.centroids {
            out[*c] = Some(-squared_distance(m, &q).sqrt());
        }
        out
    }
}

pub const VAR_SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub classes: Vec<usize>,
    pub log_prior: Vec<f64>,
    pub mean: Vec<Vec<f64>>,
    pub var: Vec<Vec<f64>>,
}

impl GaussianNb {
    pub fn fit(x: ArrayView2<f64>, y: &[usize]) -> Self {
        let (n, d) = x.dim();
        let max_var = (0..d)
            .map(|j| {
                let col = x.column(j);
                let m = exact_mean(col.iter().copied());
                col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64
            })
            .fold(0.0, f64::max);
        // all-constant features would otherwise leave zero variances
        let eps = if max_var > 0.0 { VAR_SMOOTHING * max_var } else { VAR_SMOOTHING };
        let classes = present_classes(y);
        let mut log_prior = Vec::new();
        let mut mean = Vec::new();
        let mut var = Vec::new();
        for &c in &classes {
            let rows: Vec<usize> = (0..n).filter(|&i| y[i] == c).collect();
            let nc = rows.len() as f64;
            let mu: Vec<f64> = (0..d).map(|j| exact_mean(rows.iter().map(|&i| x[[i, j]]))).collect();
            let v: Vec<f64> = (0..d)
                .map(|j| rows.iter().map(|&i| (x[[i, j]] - mu[j]).powi(2)).sum::<f64>() / nc + eps)
                .collect();
            log_prior.push((nc / n as f64).ln());
            mean.push(mu);
            var.push(v);
        }
        GaussianNb {
            classes,
            log_prior,
            mean,
            var,
        }
    }

    pub fn joint_log_likelihood(&self, x: &[f64]) -> Vec<f64> {
        (0..self.classes.len())
            .map(|k| {
                let mut s = self.log_prior[k];
                for (j, &v) in x.iter().enumerate() {
                    let var = self.var[k][j];
                    s -= 0.5 * (2.0 * std::f64::consts::PI * var).ln();
                    s -= 0.5 * (v - self.mean[k][j]).powi(2) / var;
                }
                s
            })
            .collect()
    }

    /// Class posteriors.
    pub fn scores(&self, x: &[f64]) -> ClassScores {
        let jll = self.joint_log_likelihood(x);
        let m = jll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = jll.iter().map(|v| (v - m).exp()).sum();
        let mut out = [None; N_CLASSES];
        for (&c, v) in self.classes.iter().zip(&jll) {
            out[c] = Some((v - m).exp() / z);
        }
        out
    }
}

pub const LR_C: f64 = 1.0;
pub const LR_MAX_ITER: usize = 1000;
const LR_GTOL: f64 = 1e-4;
const LBFGS_MEMORY: usize = 10;

/// Multinomial logistic regression with an L2 penalty on the weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Logistic {
    pub scaler: Standardizer,
    pub classes: Vec<usize>,
    /// Row-major `classes x (d + 1)`; the last column is the intercept.
    pub coef: Vec<f64>,
    pub iterations: usize,
}

struct LogisticProblem<'a> {
    x: &'a Array2<f64>,
    y: &'a [usize],
    k: usize,
}

impl LogisticProblem<'_> {
    /// Mean log-loss plus `|W|^2 / (2 C n)`, and its gradient.
    fn eval(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let (n, d) = self.x.dim();
        let stride = d + 1;
        let mut grad = vec![0.0; w.len()];
        let mut loss = 0.0;
        let mut z = vec![0.0; self.k];
        for i in 0..n {
            let row = self.x.row(i);
            for (c, zc) in z.iter_mut().enumerate() {
                let wc = &w[c * stride..(c + 1) * stride];
                *zc = wc[d] + row.iter().zip(wc).map(|(a, b)| a * b).sum::<f64>();
            }
            let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            loss += lse - z[self.y[i]];
            for c in 0..self.k {
                let p = (z[c] - lse).exp() - f64::from(u8::from(c == self.y[i]));
                let g = &mut grad[c * stride..(c + 1) * stride];
                for (gj, xj) in g.iter_mut().zip(row.iter()) {
                    *gj += p * xj;
                }
                g[d] += p;
            }
        }
        let nf = n as f64;
        loss /= nf;
        grad.iter_mut().for_each(|g| *g /= nf);
        let reg = 1.0 / (LR_C * nf);
        for c in 0..self.k {
            for j in 0..d {
                let v = w[c * stride + j];
                loss += 0.5 * reg * v * v;
                grad[c * stride + j] += reg * v;
            }
        }
        (loss, grad)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Limited-memory BFGS with a backtracking Armijo line search. Returns the
/// minimizer and the iteration count.
pub fn lbfgs(
    f: impl Fn(&[f64]) -> (f64, Vec<f64>),
    mut x: Vec<f64>,
    max_iter: usize,
    gtol: f64,
) -> (Vec<f64>, usize) {
    let (mut fx, mut g) = f(&x);
    let mut mem: std::collections::VecDeque<(Vec<f64>, Vec<f64>, f64)> = Default::default();
    for iter in 0..max_iter {
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= gtol {
            return (x, iter);
        }
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(mem.len());
        for (s, y, rho) in mem.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = mem.back().map_or(1.0 / dot(&g, &g).sqrt().max(1.0), |(s, y, _)| dot(s, y) / dot(y, y));
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
            mem.clear();
        }
        let mut step = 1.0;
        let (mut xn, mut fxn, mut gn);
        loop {
            xn = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect::<Vec<f64>>();
            (fxn, gn) = f(&xn);
            if fxn <= fx + 1e-4 * step * slope || step < 1e-20 {
                break;
            }
            step *= 0.5;
        }
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            if mem.len() == LBFGS_MEMORY {
                mem.pop_front();
            }
            mem.push_back((s, y, 1.0 / sy));
        }
        let improved = fx - fxn;
        x = xn;
        fx = fxn;
        g = gn;
        if step < 1e-20 || improved.abs() <= f64::EPSILON * fx.abs().max(1.0) {
            return (x, iter + 1);
        }
    }
    (x, max_iter)
}

impl Logistic {
    pub fn fit(x: ArrayView2<f64>, y: &[usize]) -> Self {
        let scaler = Standardizer::fit(x);
        let xs = scaler.matrix(x);
        let classes = present_classes(y);
        let local: Vec<usize> = y
            .iter()
            .map(|l| classes.iter().position(|c| c == l).expect("present"))
            .collect();
        let problem = LogisticProblem {
            x: &xs,
            y: &local,
            k: classes.len(),
        };
        let w0 = vec![0.0; classes.len() * (xs.ncols() + 1)];
        let (coef, iterations) = lbfgs(|w| problem.eval(w), w0, LR_MAX_ITER, LR_GTOL);
        if iterations >= LR_MAX_ITER {
            log::debug!("logistic regression reached the iteration cap");
        }
        Logistic {
            scaler,
            classes,
            coef,
            iterations,
        }
    }

    /// Class posteriors.
    pub fn scores(&self, x: &[f64]) -> ClassScores {
        let q = self.scaler.row(x);
        let stride = q.len() + 1;
        let z: Vec<f64> = (0..self.classes.len())
            .map(|c| {
                let w = &self.coef[c * stride..(c + 1) * stride];
                w[q.len()] + dot(&w[..q.len()], &q)
            })
            .collect();
        let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = z.iter().map(|v| (v - m).exp()).sum();
        let mut out = [None; N_CLASSES];
        for (&c, v) in self.classes.iter().zip(&z) {
            out[c] = Some((v - m).exp() / s);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lbfgs_minimizes_quadratic() {
        let f = |x: &[f64]| {
            let v = (x[0] - 3.0).powi(2) + 10.0 * (x[1] + 1.0).powi(2);
            (v, vec![2.0 * (x[0] - 3.0), 20.0 * (x[1] + 1.0)])
        };
        let (x, _) = lbfgs(f, vec![0.0, 0.0], 100, 1e-10);
        assert!((x[0] - 3.0).abs() < 1e-8 && (x[1] + 1.0).abs() < 1e-8);
    }
}
