//! Tree ensembles: random forest, bagging, gradient boosting, AdaBoost.

use ndarray::ArrayView2;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::prep::present_classes;
use super::tree::{fit_classifier, fit_regressor, ClassTree, RegressionTree, TreeParams};
use super::{ClassScores, N_CLASSES};
use crate::seed::Rng;

/// Averaged class distributions of bootstrap trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<ClassTree>,
    pub classes: Vec<usize>,
}

impl Forest {
    pub fn fit(
        x: ArrayView2<f64>,
        y: &[usize],
        n_trees: usize,
        max_features: Option<usize>,
        rng: &mut Rng,
    ) -> Self {
        let n = y.len();
        let trees = (0..n_trees)
            .map(|_| {
                let mut w = vec![0.0; n];
                for _ in 0..n {
                    w[rng.random_range(0..n)] += 1.0;
                }
                let params = TreeParams {
                    max_depth: None,
                    max_features,
                };
                fit_classifier(x, y, &w, params, rng)
            })
            .collect();
        Forest {
            trees,
            classes: present_classes(y),
        }
    }

    pub fn scores(&self, x: &[f64]) -> ClassScores {
        let mut avg = [0.0; N_CLASSES];
        for t in &self.trees {
            for (a, p) in avg.iter_mut().zip(t.leaf(x)) {
                *a += p / self.trees.len() as f64;
            }
        }
        let mut out = [None; N_CLASSES];
        for &c in &self.classes {
            out[c] = Some(avg[c]);
        }
        out
    }
}

fn softmax_rows(f: &[Vec<f64>]) -> Vec<Vec<f64>> {
    f.iter()
        .map(|row| {
            let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let e: Vec<f64> = row.iter().map(|v| (v - m).exp()).collect();
            let s: f64 = e.iter().sum();
            e.into_iter().map(|v| v / s).collect()
        })
        .collect()
}

/// Multinomial log-loss gradient boosting with depth-limited trees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientBoosting {
    pub classes: Vec<usize>,
    pub init: Vec<f64>,
    pub learning_rate: f64,
    /// One tree per present class per round.
    pub rounds: Vec<Vec<RegressionTree>>,
}

impl GradientBoosting {
    pub fn fit(
        x: ArrayView2<f64>,
        y: &[usize],
        n_rounds: usize,
        learning_rate: f64,
        max_depth: usize,
        rng: &mut Rng,
    ) -> Self {
        let classes = present_classes(y);
        let k = classes.len();
        let n = y.len();
        let init: Vec<f64> = classes
            .iter()
            .map(|&c| (y.iter().filter(|&&l| l == c).count() as f64 / n as f64).ln())
            .collect();
        let mut f: Vec<Vec<f64>> = vec![init.clone(); n];
        let params = TreeParams {
            max_depth: Some(max_depth),
            max_features: None,
        };
        let scale = (k as f64 - 1.0) / k as f64;
        let mut rounds = Vec::with_capacity(n_rounds);
        for _ in 0..n_rounds {
            let p = softmax_rows(&f);
            let mut trees = Vec::with_capacity(k);
            for (ci, &c) in classes.iter().enumerate() {
                let r: Vec<f64> = (0..n).map(|i| f64::from(u8::from(y[i] == c)) - p[i][ci]).collect();
                let leaf = |idx: &[usize]| {
                    let num: f64 = idx.iter().map(|&i| r[i]).sum();
                    let den: f64 = idx.iter().map(|&i| p[i][ci] * (1.0 - p[i][ci])).sum();
                    if den.abs() < 1e-150 {
                        0.0
                    } else {
                        scale * num / den
                    }
                };
                let tree = fit_regressor(x, &r, params, leaf, rng);
                for (i, row) in x.outer_iter().enumerate() {
                    let v = *tree.leaf(row.as_slice().expect("standard layout"));
                    f[i][ci] += learning_rate * v;
                }
                trees.push(tree);
            }
            rounds.push(trees);
        }
        GradientBoosting {
            classes,
            init,
            learning_rate,
            rounds,
        }
    }

    pub fn scores(&self, x: &[f64]) -> ClassScores {
        let mut raw = self.init.clone();
        for trees in &self.rounds {
            for (v, t) in raw.iter_mut().zip(trees) {
                *v += self.learning_rate * t.leaf(x);
            }
        }
        let mut out = [None; N_CLASSES];
        for (&c, v) in self.classes.iter().zip(raw) {
            out[c] = Some(v);
        }
        out
    }
}

fn argmax_dist(dist: &[f64]) -> usize {
    let mut best = 0;
    for (c, &v) in dist.iter().enumerate() {
        if v > dist[best] {
            best = c;
        }
    }
    best
}

/// SAMME boosting of decision stumps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub classes: Vec<usize>,
    pub stumps: Vec<(ClassTree, f64)>,
}

impl AdaBoost {
    pub fn fit(x: ArrayView2<f64>, y: &[usize], n_rounds: usize, rng: &mut Rng) -> Self {
        let classes = present_classes(y);
        let k = classes.len() as f64;
        let n = y.len();
        let mut w = vec![1.0 / n as f64; n];
        let mut stumps = Vec::new();
        let params = TreeParams {
            max_depth: Some(1),
            max_features: None,
        };
        for _ in 0..n_rounds {
            let stump = fit_classifier(x, y, &w, params, rng);
            let miss: Vec<bool> = x
                .outer_iter()
                .zip(y)
                .map(|(row, &l)| argmax_dist(stump.leaf(row.as_slice().expect("standard layout"))) != l)
                .collect();
            let total: f64 = w.iter().sum();
            let err = miss.iter().zip(&w).filter(|(m, _)| **m).map(|(_, v)| v).sum::<f64>() / total;
            if err <= 0.0 {
                stumps.push((stump, 1.0));
                break;
            }
            if err >= 1.0 - 1.0 / k {
                if stumps.is_empty() {
                    stumps.push((stump, 1.0));
                }
                break;
            }
            let alpha = ((1.0 - err) / err).ln() + (k - 1.0).ln();
            for (wi, &m) in w.iter_mut().zip(&miss) {
                if m {
                    *wi *= alpha.exp();
                }
            }
            let s: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= s);
            stumps.push((stump, alpha));
        }
        AdaBoost { classes, stumps }
    }

    pub fn scores(&self, x: &[f64]) -> ClassScores {
        let mut votes = [0.0; N_CLASSES];
        for (stump, alpha) in &self.stumps {
            votes[argmax_dist(stump.leaf(x))] += alpha;
        }
        let mut out = [None; N_CLASSES];
        for &c in &self.classes {
            out[c] = Some(votes[c]);
        }
        out
    }
}
