//! Soft-margin SVM dual solver on a precomputed kernel matrix.
//!
//! Sequential minimal optimization with second-order working-set
//! selection, as in libsvm. Minimizes `1/2 a'Qa - e'a` subject to
//! `0 <= a_i <= C` and `y'a = 0`, where `Q_ij = y_i y_j K_ij`.

use ndarray::ArrayView2;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    /// Decision function is `sum_i alpha_i y_i K(x_i, x) - rho`.
    pub rho: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl SmoSolution {
    /// Decision value for a point given its kernel row against the training set.
    pub fn decision(&self, y: &[f64], k_row: impl IntoIterator<Item = f64>) -> f64 {
        self.alpha
            .iter()
            .zip(y)
            .zip(k_row)
            .map(|((a, yi), k)| a * yi * k)
            .sum::<f64>()
            - self.rho
    }
}

/// Solves the dual for labels `y` in {-1, +1}.
pub fn solve(k: ArrayView2<f64>, y: &[f64], c: f64, eps: f64) -> SmoSolution {
    let n = y.len();
    assert_eq!(k.nrows(), n);
    assert_eq!(k.ncols(), n);
    let max_iter = (100 * n).max(100_000);
    let mut a = vec![0.0; n];
    let mut g = vec![-1.0; n];
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        let Some((i, j)) = select_working_set(k, y, &a, &g, c, eps) else {
            converged = true;
            break;
        };
        iterations += 1;
        let (old_ai, old_aj) = (a[i], a[j]);
        let quad = (k[[i, i]] + k[[j, j]] - 2.0 * k[[i, j]]).max(TAU);
        if y[i] != y[j] {
            let delta = (-g[i] - g[j]) / quad;
            let diff = a[i] - a[j];
            a[i] += delta;
            a[j] += delta;
            if diff > 0.0 {
                if a[j] < 0.0 {
                    a[j] = 0.0;
                    a[i] = diff;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = -diff;
            }
            if diff > 0.0 {
                if a[i] > c {
                    a[i] = c;
                    a[j] = c - diff;
                }
            } else if a[j] > c {
                a[j] = c;
                a[i] = c + diff;
            }
        } else {
            let delta = (g[i] - g[j]) / quad;
            let sum = a[i] + a[j];
            a[i] -= delta;
            a[j] += delta;
            if sum > c {
                if a[i] > c {
                    a[i] = c;
                    a[j] = sum - c;
                }
            } else if a[j] < 0.0 {
                a[j] = 0.0;
                a[i] = sum;
            }
            if sum > c {
                if a[j] > c {
                    a[j] = c;
                    a[i] = sum - c;
                }
            } else if a[i] < 0.0 {
                a[i] = 0.0;
                a[j] = sum;
            }
        }
        let (di, dj) = (a[i] - old_ai, a[j] - old_aj);
        for t in 0..n {
            g[t] += y[t] * (y[i] * k[[t, i]] * di + y[j] * k[[t, j]] * dj);
        }
    }

    let rho = compute_rho(y, &a, &g, c);
    let objective = 0.5 * a.iter().zip(&g).map(|(ai, gi)| ai * (gi - 1.0)).sum::<f64>();
    SmoSolution {
        alpha: a,
        rho,
        objective,
        iterations,
        converged,
    }
}

fn select_working_set(
    k: ArrayView2<f64>,
    y: &[f64],
    a: &[f64],
    g: &[f64],
    c: f64,
    eps: f64,
) -> Option<(usize, usize)> {
    let n = y.len();
    let mut gmax = f64::NEG_INFINITY;
    let mut i = None;
    for t in 0..n {
        let up = if y[t] > 0.0 { a[t] < c } else { a[t] > 0.0 };
        if up && -y[t] * g[t] >= gmax {
            gmax = -y[t] * g[t];
            i = Some(t);
        }
    }
    let i = i?;
    let mut gmax2 = f64::NEG_INFINITY;
    let mut best = None;
    let mut obj_min = f64::INFINITY;
    for t in 0..n {
        let low = if y[t] > 0.0 { a[t] > 0.0 } else { a[t] < c };
        if !low {
            continue;
        }
        let yg = y[t] * g[t];
        gmax2 = gmax2.max(yg);
        let grad_diff = gmax + yg;
        if grad_diff > 0.0 {
            let quad = (k[[i, i]] + k[[t, t]] - 2.0 * k[[i, t]]).max(TAU);
            let obj = -grad_diff * grad_diff / quad;
            if obj <= obj_min {
                obj_min = obj;
                best = Some(t);
            }
        }
    }
    if gmax + gmax2 < eps {
        return None;
    }
    best.map(|j| (i, j))
}

fn compute_rho(y: &[f64], a: &[f64], g: &[f64], c: f64) -> f64 {
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum, mut free) = (0.0, 0usize);
    for t in 0..y.len() {
        let yg = y[t] * g[t];
        if a[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if a[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            sum += yg;
            free += 1;
        }
    }
    if free > 0 {
        sum / free as f64
    } else {
        (ub + lb) / 2.0
    }
}
