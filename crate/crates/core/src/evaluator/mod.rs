//! Ground-truth scoring of encoding circuits and label construction.
//!
//! Every (dataset, circuit) cell trains three kernel classifiers on the
//! fidelity Gram matrix of the training split and records test accuracy.
//! A circuit's score is the best of the three.

mod classifiers;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cost::CostCounter;
use crate::datagen::PreprocessedDataset;
use crate::qsim::{CircuitId, EncodingCircuit, FidelityKernel};
use crate::seed;
use crate::{Error, Result};

pub use classifiers::{
    gpc_fit, gpc_train_predict, krc_coefficients, krc_train_predict, majority_accuracy, svc_fit,
    svc_train_predict, GpcMode, KernelClassifier, GPC_MAX_ITER, GPC_TOL, KRC_ALPHA, SVC_C,
    SVC_EPS,
};

pub const DEFAULT_EPSILON: f64 = 0.01;

/// Slack on the tolerance comparison so that accuracies like 0.855 vs
/// 0.8625 - 0.0075 are not split by rounding.
const TIE_SLACK: f64 = 1e-9;

/// Test accuracies of one circuit on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitScore {
    pub circuit_id: CircuitId,
    /// Indexed by [`KernelClassifier::ALL`].
    pub accuracy: [f64; 3],
    pub best_accuracy: f64,
    /// Classifiers whose training failed and were scored as majority class.
    pub failures: Vec<KernelClassifier>,
}

impl CircuitScore {
    pub fn new(circuit_id: CircuitId, accuracy: [f64; 3]) -> Self {
        CircuitScore {
            circuit_id,
            accuracy,
            best_accuracy: accuracy.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            failures: Vec::new(),
        }
    }

    pub fn get(&self, c: KernelClassifier) -> f64 {
        self.accuracy[c as usize]
    }

    /// Mean over the three classifiers; diagnostic only.
    pub fn mean_accuracy(&self) -> f64 {
        self.accuracy.iter().sum::<f64>() / 3.0
    }
}

/// Scores each circuit on `d`. Classifier failures degrade to the
/// majority-class accuracy instead of aborting.
pub fn score_circuits(
    d: &PreprocessedDataset,
    circuits: &[EncodingCircuit],
    counter: Option<&CostCounter>,
) -> Result<Vec<CircuitScore>> {
    circuits
        .par_iter()
        .map(|c| score_one(d, c, counter))
        .collect()
}

fn score_one(
    d: &PreprocessedDataset,
    c: &EncodingCircuit,
    counter: Option<&CostCounter>,
) -> Result<CircuitScore> {
    let mut kernel = FidelityKernel::new(c);
    kernel.counter = counter;
    let k_train = kernel.gram_symmetric(d.train_features.view())?;
    let k_test = kernel.gram(d.test_features.view(), d.train_features.view())?;
    let mut accuracy = [0.0; 3];
    let mut failures = Vec::new();
    for (slot, clf) in accuracy.iter_mut().zip(KernelClassifier::ALL) {
        *slot = match clf.train_predict(
            k_train.view(),
            &d.train_labels,
            k_test.view(),
            &d.test_labels,
        ) {
            Ok(acc) => acc,
            Err(e) => {
                log::warn!("{} / {} / {}: {e}; scoring as majority class", d.name, c.id, clf.as_str());
                failures.push(clf);
                majority_accuracy(&d.train_labels, &d.test_labels)
            }
        };
    }
    let mut score = CircuitScore::new(c.id, accuracy);
    score.failures = failures;
    Ok(score)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelMode {
    #[serde(rename = "SINGLE-BEST-OUT")]
    Single,
    #[serde(rename = "TIED-BEST-OUT")]
    Tied,
}

impl fmt::Display for LabelMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelMode::Single => "SINGLE-BEST-OUT",
            LabelMode::Tied => "TIED-BEST-OUT",
        })
    }
}

impl FromStr for LabelMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SINGLE" | "SINGLE-BEST-OUT" => Ok(LabelMode::Single),
            "TIED" | "TIED-BEST-OUT" => Ok(LabelMode::Tied),
            _ => Err(Error::UnknownId(s.to_string())),
        }
    }
}

/// Ground-truth circuits for one dataset, in canonical order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSet {
    pub circuits: Vec<CircuitId>,
    pub mode: LabelMode,
    pub epsilon: f64,
}

impl LabelSet {
    pub fn contains(&self, c: CircuitId) -> bool {
        self.circuits.contains(&c)
    }

    pub fn len(&self) -> usize {
        self.circuits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.circuits.is_empty()
    }

    /// `HD|SRx` style rendering.
    pub fn signature(&self) -> String {
        self.circuits
            .iter()
            .map(|c| c.as_str())
            .collect::<Vec<_>>()
            .join("|")
    }

    pub fn parse_signature(s: &str, mode: LabelMode, epsilon: f64) -> Result<Self> {
        let mut circuits = s
            .split('|')
            .map(str::parse)
            .collect::<Result<Vec<CircuitId>>>()?;
        circuits.sort();
        circuits.dedup();
        if circuits.is_empty() {
            return Err(Error::Format("empty label set".into()));
        }
        Ok(LabelSet {
            circuits,
            mode,
            epsilon,
        })
    }
}

fn best_of(scores: &[CircuitScore]) -> f64 {
    scores
        .iter()
        .map(|s| s.best_accuracy)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// The argmax circuit; exact ties are broken by a uniform draw from `seed`.
pub fn single_label(scores: &[CircuitScore], seed: u64) -> CircuitId {
    let best = best_of(scores);
    let mut tied: Vec<CircuitId> = scores
        .iter()
        .filter(|s| s.best_accuracy == best)
        .map(|s| s.circuit_id)
        .collect();
    tied.sort();
    if tied.len() > 1 {
        log::debug!("tie between {} circuits at accuracy {best}", tied.len());
    }
    let mut rng = seed::rng(seed);
    tied[rng.random_range(0..tied.len())]
}

/// Builds the label set for `scores` under `mode`.
pub fn label(scores: &[CircuitScore], mode: LabelMode, epsilon: f64, seed: u64) -> Result<LabelSet> {
    if scores.is_empty() {
        return Err(Error::InvalidArgument("no circuit scores".into()));
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let circuits = match mode {
        LabelMode::Single => vec![single_label(scores, seed)],
        LabelMode::Tied => {
            let best = best_of(scores);
            let mut c: Vec<CircuitId> = scores
                .iter()
                .filter(|s| s.best_accuracy >= best - epsilon - TIE_SLACK)
                .map(|s| s.circuit_id)
                .collect();
            c.sort();
            c
        }
    };
    Ok(LabelSet {
        circuits,
        mode,
        epsilon: if mode == LabelMode::Tied { epsilon } else { 0.0 },
    })
}
