//! The fourteen base classifiers behind one interface.

use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use super::ensemble::{AdaBoost, Forest, GradientBoosting};
use super::kernel_svm::{KernelKind, OvrSvm};
use super::mlp::Mlp;
use super::prep::present_classes;
use super::simple::{GaussianNb, Knn, Logistic, NearestCentroid};
use super::tree::{fit_classifier, ClassTree, TreeParams};
use super::{ClassScores, N_CLASSES};
use crate::{seed, Error, Result};

pub const RF_TREES: usize = 10;
pub const BAGGING_TREES: usize = 10;
pub const GB_ROUNDS: usize = 100;
pub const GB_LEARNING_RATE: f64 = 0.1;
pub const GB_DEPTH: usize = 3;
pub const ADABOOST_ROUNDS: usize = 50;
pub const KNN_K: usize = 5;
pub const MLP1_HIDDEN: [usize; 1] = [500];
pub const MLP3_HIDDEN: [usize; 3] = [100, 100, 100];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassifierId {
    #[serde(rename = "DT")]
    Dt,
    #[serde(rename = "RF")]
    Rf,
    #[serde(rename = "E-GB")]
    Egb,
    #[serde(rename = "AB")]
    Ab,
    #[serde(rename = "Bg")]
    Bg,
    #[serde(rename = "SVM-L")]
    SvmL,
    #[serde(rename = "SVM-R")]
    SvmR,
    #[serde(rename = "SVM-S")]
    SvmS,
    #[serde(rename = "MLP-1")]
    Mlp1,
    #[serde(rename = "MLP-3")]
    Mlp3,
    #[serde(rename = "KNN")]
    Knn,
    #[serde(rename = "NC")]
    Nc,
    #[serde(rename = "NB")]
    Nb,
    #[serde(rename = "LR")]
    Lr,
}

impl ClassifierId {
    pub const ALL: [ClassifierId; 14] = [
        ClassifierId::Dt,
        ClassifierId::Rf,
        ClassifierId::Egb,
        ClassifierId::Ab,
        ClassifierId::Bg,
        ClassifierId::SvmL,
        ClassifierId::SvmR,
        ClassifierId::SvmS,
        ClassifierId::Mlp1,
        ClassifierId::Mlp3,
        ClassifierId::Knn,
        ClassifierId::Nc,
        ClassifierId::Nb,
        ClassifierId::Lr,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierId::Dt => "DT",
            ClassifierId::Rf => "RF",
            ClassifierId::Egb => "E-GB",
            ClassifierId::Ab => "AB",
            ClassifierId::Bg => "Bg",
            ClassifierId::SvmL => "SVM-L",
            ClassifierId::SvmR => "SVM-R",
            ClassifierId::SvmS => "SVM-S",
            ClassifierId::Mlp1 => "MLP-1",
            ClassifierId::Mlp3 => "MLP-3",
            ClassifierId::Knn => "KNN",
            ClassifierId::Nc => "NC",
            ClassifierId::Nb => "NB",
            ClassifierId::Lr => "LR",
        }
    }

    /// How the class scores should be read when ranking.
    pub fn score_kind(self) -> ScoreKind {
        match self {
            ClassifierId::Dt
            | ClassifierId::Rf
            | ClassifierId::Ab
            | ClassifierId::Bg
            | ClassifierId::Knn => ScoreKind::Votes,
            _ => ScoreKind::Continuous,
        }
    }
}

impl fmt::Display for ClassifierId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ClassifierId::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownId(s.to_string()))
    }
}

/// Vote-style scores are fractions of members or neighbours, so a zero means
/// the class received no support and is left out of rankings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    Votes,
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Model {
    /// Stand-in when training saw a single class.
    Constant(usize),
    Tree(ClassTree),
    Forest(Forest),
    Boosting(GradientBoosting),
    AdaBoost(AdaBoost),
    Svm(OvrSvm),
    Mlp(Mlp),
    Knn(Knn),
    Centroid(NearestCentroid),
    Bayes(GaussianNb),
    Logistic(Logistic),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedClassifier {
    pub id: ClassifierId,
    pub model: Model,
}

/// Fits classifier `id` on rows of `x` labelled with circuit indices `y`.
pub fn train_base(id: ClassifierId, x: ArrayView2<f64>, y: &[usize], seed: u64) -> Result<TrainedClassifier> {
    if x.nrows() != y.len() || y.is_empty() {
        return Err(Error::Dimension(format!("{} rows for {} labels", x.nrows(), y.len())));
    }
    if let Some(&bad) = y.iter().find(|&&c| c >= N_CLASSES) {
        return Err(Error::InvalidArgument(format!("label {bad} out of range")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite meta-feature".into()));
    }
    let classes = present_classes(y);
    if classes.len() < 2 {
        log::warn!("{id}: single-class training set, using a constant predictor");
        return Ok(TrainedClassifier {
            id,
            model: Model::Constant(classes[0]),
        });
    }
    let mut rng = seed::rng(seed);
    let d = x.ncols();
    let model = match id {
        ClassifierId::Dt => Model::Tree(fit_classifier(
            x,
            y,
            &vec![1.0; y.len()],
            TreeParams::default(),
            &mut rng,
        )),
        ClassifierId::Rf => {
            let m = ((d as f64).sqrt().floor() as usize).max(1);
            Model::Forest(Forest::fit(x, y, RF_TREES, Some(m), &mut rng))
        }
        ClassifierId::Bg => Model::Forest(Forest::fit(x, y, BAGGING_TREES, None, &mut rng)),
        ClassifierId::Egb => Model::Boosting(GradientBoosting::fit(
            x,
            y,
            GB_ROUNDS,
            GB_LEARNING_RATE,
            GB_DEPTH,
            &mut rng,
        )),
        ClassifierId::Ab => Model::AdaBoost(AdaBoost::fit(x, y, ADABOOST_ROUNDS, &mut rng)),
        ClassifierId::SvmL => Model::Svm(OvrSvm::fit(x, y, KernelKind::Linear)),
        ClassifierId::SvmR => Model::Svm(OvrSvm::fit(x, y, KernelKind::Rbf)),
        ClassifierId::SvmS => Model::Svm(OvrSvm::fit(x, y, KernelKind::Sigmoid)),
        ClassifierId::Mlp1 => Model::Mlp(Mlp::fit(x, y, &MLP1_HIDDEN, &mut rng)),
        ClassifierId::Mlp3 => Model::Mlp(Mlp::fit(x, y, &MLP3_HIDDEN, &mut rng)),
        ClassifierId::Knn => Model::Knn(Knn::fit(x, y, KNN_K)),
        ClassifierId::Nc => Model::Centroid(NearestCentroid::fit(x, y)),
        ClassifierId::Nb => Model::Bayes(GaussianNb::fit(x, y)),
        ClassifierId::Lr => Model::Logistic(Logistic::fit(x, y)),
    };
    Ok(TrainedClassifier { id, model })
}

impl TrainedClassifier {
    /// Per-class scores; `None` for classes unseen in training.
    pub fn scores(&self, x: &[f64]) -> ClassScores {
        match &self.model {
            Model::Constant(c) => {
                let mut s = [None; N_CLASSES];
                s[*c] = Some(1.0);
                s
            }
            Model::Tree(t) => {
                let p = t.leaf(x);
                let mut s = [None; N_CLASSES];
                for (c, v) in p.iter().enumerate() {
                    if *v > 0.0 {
                        s[c] = Some(*v);
                    }
                }
                s
            }
            Model::Forest(m) => m.scores(x),
            Model::Boosting(m) => m.scores(x),
            Model::AdaBoost(m) => m.scores(x),
            Model::Svm(m) => m.scores(x),
            Model::Mlp(m) => m.scores(x),
            Model::Knn(m) => m.scores(x),
            Model::Centroid(m) => m.scores(x),
            Model::Bayes(m) => m.scores(x),
            Model::Logistic(m) => m.scores(x),
        }
    }

    /// Highest-scoring class, lowest index on ties.
    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.scores(x)).expect("a fitted model scores at least one class")
    }

    /// Classes ordered by score, descending, ties by index. Vote-style zeros
    /// and unseen classes are dropped.
    pub fn ranking(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let kind = match self.model {
            Model::Constant(_) => ScoreKind::Votes,
            _ => self.id.score_kind(),
        };
        let scores = self.scores(x);
        let r = rank_scores(&scores, kind);
        if r.is_empty() {
            let c = argmax(&scores).expect("a fitted model scores at least one class");
            return vec![(c, scores[c].unwrap_or(0.0))];
        }
        r
    }
}

pub fn argmax(s: &ClassScores) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (c, v) in s.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((c, v));
            }
        }
    }
    best.map(|(c, _)| c)
}

pub fn rank_scores(s: &ClassScores, kind: ScoreKind) -> Vec<(usize, f64)> {
    let mut r: Vec<(usize, f64)> = s
        .iter()
        .enumerate()
        .filter_map(|(c, v)| v.map(|v| (c, v)))
        .filter(|&(_, v)| kind == ScoreKind::Continuous || v > 0.0)
        .collect();
    r.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    r
}
