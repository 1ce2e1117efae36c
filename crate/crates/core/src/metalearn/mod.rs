//! Meta-learning over complexity features: base classifiers, the majority
//! vote and leave-one-out strategies, Top-k inference and cost accounting.

mod ensemble;
mod eval;
mod kernel_svm;
mod mlp;
mod model;
mod prep;
mod simple;
mod tree;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::complexity::{FeatureMode, MetricId};
use crate::evaluator::{self, CircuitScore, LabelMode, LabelSet};
use crate::qsim::CircuitId;
use crate::{seed, Error, Result};

pub use eval::{
    cost_ratio, hit, loocv_evaluate, majority_vote, mv_evaluate, recommend_topk, stratified_split,
    train_final, CostRatio, LoocvCell, LoocvReport, MvReport, MvRun, Recommendation, Recommender,
    Strategy, Vote, RECOMMENDER_FORMAT_VERSION, TEST_FRACTION, TOP_K_MAX,
};
pub use model::{argmax, rank_scores, train_base, ClassifierId, Model, ScoreKind, TrainedClassifier};

pub const N_CLASSES: usize = CircuitId::ALL.len();

/// One score per circuit class; `None` when the class was not in training.
pub type ClassScores = [Option<f64>; N_CLASSES];

/// One dataset in the meta-dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaRecord {
    pub dataset_name: String,
    /// All 24 metrics in canonical order.
    pub features: Vec<f64>,
    /// Best kernel-classifier accuracy per circuit, canonical order.
    pub best_accuracy: [f64; N_CLASSES],
    pub label_set: LabelSet,
    /// Single training target: the best circuit with seeded tie-breaking.
    pub target: CircuitId,
}

impl MetaRecord {
    pub fn new(
        dataset_name: impl Into<String>,
        features: Vec<f64>,
        scores: &[CircuitScore],
        mode: LabelMode,
        epsilon: f64,
        global_seed: u64,
    ) -> Result<Self> {
        let dataset_name = dataset_name.into();
        if features.len() != MetricId::ALL.len() {
            return Err(Error::Dimension(format!(
                "{dataset_name}: expected {} features, got {}",
                MetricId::ALL.len(),
                features.len()
            )));
        }
        let mut best_accuracy = [f64::NAN; N_CLASSES];
        for s in scores {
            best_accuracy[s.circuit_id.index()] = s.best_accuracy;
        }
        if best_accuracy.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidArgument(format!(
                "{dataset_name}: scores must cover all nine circuits"
            )));
        }
        let tie_seed = label_seed(global_seed, &dataset_name);
        let label_set = evaluator::label(scores, mode, epsilon, tie_seed)?;
        let target = evaluator::single_label(scores, tie_seed);
        Ok(MetaRecord {
            dataset_name,
            features,
            best_accuracy,
            label_set,
            target,
        })
    }

    pub fn scores(&self) -> Vec<CircuitScore> {
        CircuitId::ALL
            .iter()
            .map(|&c| {
                let a = self.best_accuracy[c.index()];
                CircuitScore::new(c, [a, a, a])
            })
            .collect()
    }

    /// Same record under a different labeling rule.
    pub fn relabel(&self, mode: LabelMode, epsilon: f64, global_seed: u64) -> Result<Self> {
        let label_set = evaluator::label(
            &self.scores(),
            mode,
            epsilon,
            label_seed(global_seed, &self.dataset_name),
        )?;
        Ok(MetaRecord {
            label_set,
            ..self.clone()
        })
    }

    pub fn features_for(&self, mode: FeatureMode) -> Vec<f64> {
        mode.select(&self.features)
    }
}

/// Seed for breaking exact accuracy ties of one dataset.
pub fn label_seed(global_seed: u64, dataset_name: &str) -> u64 {
    seed::derive(global_seed, &[seed::hash_str(dataset_name)])
}

/// Feature matrix and target indices for `rows` under `mode`.
pub(crate) fn design(meta: &[MetaRecord], rows: &[usize], mode: FeatureMode) -> (Array2<f64>, Vec<usize>) {
    let w = mode.width();
    let mut x = Array2::zeros((rows.len(), w));
    let mut y = Vec::with_capacity(rows.len());
    for (r, &i) in rows.iter().enumerate() {
        for (j, v) in meta[i].features_for(mode).into_iter().enumerate() {
            x[[r, j]] = v;
        }
        y.push(meta[i].target.index());
    }
    (x, y)
}
