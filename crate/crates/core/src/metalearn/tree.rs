//! CART trees: weighted Gini classification and squared-error regression.

use ndarray::ArrayView2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::N_CLASSES;
use crate::seed::Rng;

const IMPROVEMENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default)]
pub struct TreeParams {
    pub max_depth: Option<usize>,
    /// Features examined per split; all when `None`.
    pub max_features: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node<T> {
    Leaf(T),
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node<T>>,
        right: Box<Node<T>>,
    },
}

impl<T> Node<T> {
    pub fn leaf(&self, x: &[f64]) -> &T {
        let mut node = self;
        loop {
            match node {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] <= *threshold { left } else { right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Leaf(_) => 0,
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// Class distribution at a leaf, normalized to sum to one.
pub type ClassTree = Node<Vec<f64>>;
pub type RegressionTree = Node<f64>;

/// Running statistic of one side of a candidate split.
trait SplitStat: Clone {
    fn add(&mut self, i: usize);
    fn remove(&mut self, i: usize);
    /// Weighted impurity contribution; lower is better.
    fn cost(&self) -> f64;
}

#[derive(Clone)]
struct Gini<'a> {
    y: &'a [usize],
    w: &'a [f64],
    counts: [f64; N_CLASSES],
    total: f64,
}

impl SplitStat for Gini<'_> {
    fn add(&mut self, i: usize) {
        self.counts[self.y[i]] += self.w[i];
        self.total += self.w[i];
    }
    fn remove(&mut self, i: usize) {
        self.counts[self.y[i]] -= self.w[i];
        self.total -= self.w[i];
    }
    fn cost(&self) -> f64 {
        if self.total <= 0.0 {
            return 0.0;
        }
        let sq: f64 = self.counts.iter().map(|c| c * c).sum();
        self.total - sq / self.total
    }
}

#[derive(Clone)]
struct SquaredError<'a> {
    r: &'a [f64],
    w: &'a [f64],
    sum: f64,
    sum_sq: f64,
    total: f64,
}

impl SplitStat for SquaredError<'_> {
    fn add(&mut self, i: usize) {
        self.sum += self.w[i] * self.r[i];
        self.sum_sq += self.w[i] * self.r[i] * self.r[i];
        self.total += self.w[i];
    }
    fn remove(&mut self, i: usize) {
        self.sum -= self.w[i] * self.r[i];
        self.sum_sq -= self.w[i] * self.r[i] * self.r[i];
        self.total -= self.w[i];
    }
    fn cost(&self) -> f64 {
        if self.total <= 0.0 {
            return 0.0;
        }
        (self.sum_sq - self.sum * self.sum / self.total).max(0.0)
    }
}

struct Builder<'a, S, L> {
    x: ArrayView2<'a, f64>,
    params: TreeParams,
    empty: S,
    leaf: L,
}

impl<'a, S: SplitStat, L> Builder<'a, S, L> {
    fn stat(&self, idx: &[usize]) -> S {
        let mut s = self.empty.clone();
        for &i in idx {
            s.add(i);
        }
        s
    }

    /// Best `(cost, feature, threshold)` over the candidate features.
    fn best_split(&self, idx: &[usize], features: &[usize]) -> Option<(f64, usize, f64)> {
        let parent = self.stat(idx);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut order = idx.to_vec();
        for &f in features {
            order.sort_by(|&a, &b| self.x[[a, f]].total_cmp(&self.x[[b, f]]).then(a.cmp(&b)));
            let mut left = self.empty.clone();
            let mut right = parent.clone();
            for k in 0..order.len() - 1 {
                left.add(order[k]);
                right.remove(order[k]);
                let (lo, hi) = (self.x[[order[k], f]], self.x[[order[k + 1], f]]);
                if hi <= lo {
                    continue;
                }
                let cost = left.cost() + right.cost();
                if best.is_none_or(|(c, _, _)| cost < c - IMPROVEMENT_TOL) {
                    let mut t = lo + (hi - lo) / 2.0;
                    if t >= hi {
                        t = lo;
                    }
                    best = Some((cost, f, t));
                }
            }
        }
        best
    }
}

impl<'a, S: SplitStat, T, L: Fn(&[usize]) -> T> Builder<'a, S, L> {
    fn build(&self, idx: Vec<usize>, depth: usize, rng: &mut Rng) -> Node<T> {
        let stat = self.stat(&idx);
        let at_limit = self.params.max_depth.is_some_and(|m| depth >= m);
        if idx.len() < 2 || at_limit || stat.cost() <= 1e-14 {
            return Node::Leaf((self.leaf)(&idx));
        }
        let mut features: Vec<usize> = (0..self.x.ncols()).collect();
        if let Some(m) = self.params.max_features {
            features.shuffle(rng);
            features.truncate(m.max(1));
        }
        let Some((_, feature, threshold)) = self.best_split(&idx, &features) else {
            return Node::Leaf((self.leaf)(&idx));
        };
        let (l, r): (Vec<usize>, Vec<usize>) =
            idx.into_iter().partition(|&i| self.x[[i, feature]] <= threshold);
        Node::Split {
            feature,
            threshold,
            left: Box::new(self.build(l, depth + 1, rng)),
            right: Box::new(self.build(r, depth + 1, rng)),
        }
    }
}

/// Fits a classification tree on the rows with positive weight.
pub fn fit_classifier(
    x: ArrayView2<f64>,
    y: &[usize],
    w: &[f64],
    params: TreeParams,
    rng: &mut Rng,
) -> ClassTree {
    let idx: Vec<usize> = (0..y.len()).filter(|&i| w[i] > 0.0).collect();
    let builder = Builder {
        x,
        params,
        empty: Gini {
            y,
            w,
            counts: [0.0; N_CLASSES],
            total: 0.0,
        },
        leaf: |idx: &[usize]| {
            let mut dist = vec![0.0; N_CLASSES];
            for &i in idx {
                dist[y[i]] += w[i];
            }
            let total: f64 = dist.iter().sum();
            dist.iter_mut().for_each(|v| *v /= total);
            dist
        },
    };
    builder.build(idx, 0, rng)
}

/// Fits a regression tree on targets `r`; leaf values come from `leaf`.
pub fn fit_regressor(
    x: ArrayView2<f64>,
    r: &[f64],
    params: TreeParams,
    leaf: impl Fn(&[usize]) -> f64,
    rng: &mut Rng,
) -> RegressionTree {
    let w = vec![1.0; r.len()];
    let builder = Builder {
        x,
        params,
        empty: SquaredError {
            r,
            w: &w,
            sum: 0.0,
            sum_sq: 0.0,
            total: 0.0,
        },
        leaf,
    };
    builder.build((0..r.len()).collect(), 0, rng)
}
