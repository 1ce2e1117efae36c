//! Multi-layer perceptron with ReLU hidden layers and softmax output,
//! trained by mini-batch Adam.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::prep::{present_classes, Standardizer};
use super::{ClassScores, N_CLASSES};
use crate::seed::Rng;

const LEARNING_RATE: f64 = 1e-3;
const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;
const L2: f64 = 1e-4;
const MAX_EPOCHS: usize = 200;
const TOL: f64 = 1e-4;
const NO_CHANGE_EPOCHS: usize = 10;
const MAX_BATCH: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub scaler: Standardizer,
    pub classes: Vec<usize>,
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
    pub epochs: usize,
}

struct Adam {
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
    mb: Vec<Array1<f64>>,
    vb: Vec<Array1<f64>>,
    t: i32,
}

fn relu(a: &mut Array2<f64>) {
    a.mapv_inplace(|v| v.max(0.0));
}

fn softmax(a: &mut Array2<f64>) {
    for mut row in a.outer_iter_mut() {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - m).exp());
        let s = row.sum();
        row.mapv_inplace(|v| v / s);
    }
}

impl Mlp {
    fn forward(&self, x: ArrayView2<f64>) -> Vec<Array2<f64>> {
        let mut acts = vec![x.to_owned()];
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = acts[l].dot(w) + b;
            if l + 1 < self.weights.len() {
                relu(&mut z);
            } else {
                softmax(&mut z);
            }
            acts.push(z);
        }
        acts
    }

    pub fn fit(x: ArrayView2<f64>, y: &[usize], hidden: &[usize], rng: &mut Rng) -> Self {
        let scaler = Standardizer::fit(x);
        let xs = scaler.matrix(x);
        let classes = present_classes(y);
        let n = y.len();
        let mut target = Array2::<f64>::zeros((n, classes.len()));
        for (i, &l) in y.iter().enumerate() {
            let pos = classes.iter().position(|&c| c == l).expect("present");
            target[[i, pos]] = 1.0;
        }
        let mut sizes = vec![x.ncols()];
        sizes.extend_from_slice(hidden);
        sizes.push(classes.len());
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in sizes.windows(2) {
            let bound = (6.0 / (pair[0] + pair[1]) as f64).sqrt();
            weights.push(Array2::from_shape_fn((pair[0], pair[1]), |_| rng.random_range(-bound..bound)));
            biases.push(Array1::from_shape_fn(pair[1], |_| rng.random_range(-bound..bound)));
        }
        let mut model = Mlp {
            scaler,
            classes,
            weights,
            biases,
            epochs: 0,
        };
        let mut adam = Adam {
            m: model.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            v: model.weights.iter().map(|w| Array2::zeros(w.raw_dim())).collect(),
            mb: model.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
            vb: model.biases.iter().map(|b| Array1::zeros(b.raw_dim())).collect(),
            t: 0,
        };
        let batch = n.min(MAX_BATCH);
        let mut order: Vec<usize> = (0..n).collect();
        let mut best_loss = f64::INFINITY;
        let mut stale = 0;
        for epoch in 1..=MAX_EPOCHS {
            order.shuffle(rng);
            let mut epoch_loss = 0.0;
            for chunk in order.chunks(batch) {
                let xb = xs.select(Axis(0), chunk);
                let tb = target.select(Axis(0), chunk);
                epoch_loss += model.step(xb.view(), tb.view(), &mut adam) * chunk.len() as f64;
            }
            epoch_loss /= n as f64;
            model.epochs = epoch;
            if epoch_loss > best_loss - TOL {
                stale += 1;
            } else {
                stale = 0;
            }
            best_loss = best_loss.min(epoch_loss);
            if stale > NO_CHANGE_EPOCHS {
                break;
            }
        }
        model
    }

    /// One Adam update on a batch; returns the regularized batch loss.
    fn step(&mut self, xb: ArrayView2<f64>, tb: ArrayView2<f64>, adam: &mut Adam) -> f64 {
        let m = xb.nrows() as f64;
        let acts = self.forward(xb);
        let out = acts.last().expect("output layer");
        let ce = -out
            .iter()
            .zip(tb.iter())
            .filter(|(_, &t)| t > 0.0)
            .map(|(p, _)| p.max(1e-300).ln())
            .sum::<f64>()
            / m;
        let penalty: f64 = self.weights.iter().map(|w| w.iter().map(|v| v * v).sum::<f64>()).sum();
        let loss = ce + 0.5 * L2 * penalty / m;

        let mut delta = (out - &tb) / m;
        adam.t += 1;
        let lr = LEARNING_RATE * (1.0 - BETA2.powi(adam.t)).sqrt() / (1.0 - BETA1.powi(adam.t));
        for l in (0..self.weights.len()).rev() {
            let gw = acts[l].t().dot(&delta) + &self.weights[l] * (L2 / m);
            let gb = delta.sum_axis(Axis(0));
            if l > 0 {
                let mut next = delta.dot(&self.weights[l].t());
                next.zip_mut_with(&acts[l], |d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = next;
            }
            adam.m[l].zip_mut_with(&gw, |m, &g| *m = BETA1 * *m + (1.0 - BETA1) * g);
            adam.v[l].zip_mut_with(&gw, |v, &g| *v = BETA2 * *v + (1.0 - BETA2) * g * g);
            adam.mb[l].zip_mut_with(&gb, |m, &g| *m = BETA1 * *m + (1.0 - BETA1) * g);
            adam.vb[l].zip_mut_with(&gb, |v, &g| *v = BETA2 * *v + (1.0 - BETA2) * g * g);
            let (mw, vw) = (&adam.m[l], &adam.v[l]);
            ndarray::Zip::from(&mut self.weights[l])
                .and(mw)
                .and(vw)
                .for_each(|w, &m, &v| *w -= lr * m / (v.sqrt() + ADAM_EPS));
            let (mb, vb) = (&adam.mb[l], &adam.vb[l]);
            ndarray::Zip::from(&mut self.biases[l])
                .and(mb)
                .and(vb)
                .for_each(|b, &m, &v| *b -= lr * m / (v.sqrt() + ADAM_EPS));
        }
        loss
    }

    pub fn scores(&self, x: &[f64]) -> ClassScores {
        let q = Array2::from_shape_vec((1, x.len()), self.scaler.row(x)).expect("row shape");
        let acts = self.forward(q.view());
        let out = acts.last().expect("output layer");
        let mut scores = [None; N_CLASSES];
        for (pos, &c) in self.classes.iter().enumerate() {
            scores[c] = Some(out[[0, pos]]);
        }
        scores
    }
}
