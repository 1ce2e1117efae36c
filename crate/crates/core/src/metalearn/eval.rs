//! Majority-vote and leave-one-out strategies, final training, Top-k
//! inference and training-cost bookkeeping.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::model::{train_base, ClassifierId, TrainedClassifier};
use super::{design, MetaRecord, N_CLASSES};
use crate::complexity::{ComplexityVector, FeatureMode};
use crate::cost::CostCounter;
use crate::evaluator::LabelSet;
use crate::qsim::CircuitId;
use crate::{seed, Error, Result};

pub const TEST_FRACTION: f64 = 0.2;
/// Depth of the rankings kept for hit-rate reporting.
pub const TOP_K_MAX: usize = 3;
pub const RECOMMENDER_FORMAT_VERSION: u32 = 1;
const MAX_SPLIT_ATTEMPTS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "MV")]
    Mv,
    #[serde(rename = "LOOCV")]
    Loocv,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Mv => "MV",
            Strategy::Loocv => "LOOCV",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "MV" => Ok(Strategy::Mv),
            "LOOCV" => Ok(Strategy::Loocv),
            _ => Err(Error::UnknownId(s.to_string())),
        }
    }
}

/// Ranked circuits with the support behind each rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub ranked: Vec<CircuitId>,
    /// Vote counts (MV) or class scores (single model), aligned with `ranked`.
    pub votes: Vec<f64>,
}

impl Recommendation {
    fn from_pairs(pairs: &[(usize, f64)], k: usize) -> Self {
        let top = &pairs[..pairs.len().min(k)];
        Recommendation {
            ranked: top.iter().map(|&(c, _)| CircuitId::ALL[c]).collect(),
            votes: top.iter().map(|&(_, v)| v).collect(),
        }
    }

    /// The first `k` entries.
    pub fn truncated(&self, k: usize) -> Recommendation {
        let k = k.min(self.ranked.len());
        Recommendation {
            ranked: self.ranked[..k].to_vec(),
            votes: self.votes[..k].to_vec(),
        }
    }

    pub fn top1(&self) -> Option<CircuitId> {
        self.ranked.first().copied()
    }
}

/// True when any recommended circuit is in the ground-truth set.
pub fn hit(rec: &Recommendation, truth: &LabelSet) -> bool {
    rec.ranked.iter().any(|&c| truth.contains(c))
}

fn hit_at(ranked: &[CircuitId], truth: &LabelSet, k: usize) -> bool {
    ranked.iter().take(k).any(|&c| truth.contains(c))
}

/// Outcome of a majority vote over ensemble members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vote {
    pub winner: CircuitId,
    pub votes: [usize; N_CLASSES],
    /// More than one circuit shared the top count.
    pub tie: bool,
}

impl Vote {
    fn ranking(&self) -> Vec<(usize, f64)> {
        let mut r: Vec<(usize, f64)> = self
            .votes
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(c, &v)| (c, v as f64))
            .collect();
        r.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        r
    }
}

/// Counts member predictions; ties go to the lowest canonical circuit.
pub fn majority_vote(members: &[TrainedClassifier], x: &[f64]) -> Vote {
    let mut votes = [0usize; N_CLASSES];
    for m in members {
        votes[m.predict(x)] += 1;
    }
    let top = votes.iter().copied().max().unwrap_or(0);
    let winner = votes.iter().position(|&v| v == top).unwrap_or(0);
    let tie = votes.iter().filter(|&&v| v == top).count() > 1;
    Vote {
        winner: CircuitId::ALL[winner],
        votes,
        tie,
    }
}

/// Stratified split by label-set signature. Each stratum contributes its
/// largest-remainder share of `round(TEST_FRACTION * n)` test records.
pub fn stratified_split(meta: &[MetaRecord], split_seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut strata: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in meta.iter().enumerate() {
        strata.entry(r.label_set.signature()).or_default().push(i);
    }
    let n_test = (TEST_FRACTION * meta.len() as f64).round() as usize;
    let quotas: Vec<f64> = strata
        .values()
        .map(|g| g.len() as f64 * n_test as f64 / meta.len() as f64)
        .collect();
    let mut take: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..quotas.len()).collect();
    order.sort_by(|&a, &b| (quotas[b] - quotas[b].floor()).total_cmp(&(quotas[a] - quotas[a].floor())).then(a.cmp(&b)));
    let mut left = n_test - take.iter().sum::<usize>();
    for g in order {
        if left == 0 {
            break;
        }
        take[g] += 1;
        left -= 1;
    }
    let mut rng = seed::rng(split_seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (group, &t) in strata.into_values().zip(&take) {
        let mut g = group;
        g.shuffle(&mut rng);
        test.extend_from_slice(&g[..t]);
        train.extend_from_slice(&g[t..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// One majority-vote evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvRun {
    pub split_seed: u64,
    pub test: Vec<usize>,
    /// Top-`TOP_K_MAX` ensemble rankings, aligned with `test`.
    pub predictions: Vec<Recommendation>,
    pub ties: usize,
    /// Top-1 hit rate against the records' label sets.
    pub accuracy: f64,
}

impl MvRun {
    /// Top-k hit rate of this run's predictions against `truth`, indexed by record.
    pub fn hit_rate_against(&self, truth: &[LabelSet], k: usize) -> f64 {
        let hits = self
            .test
            .iter()
            .zip(&self.predictions)
            .filter(|(&i, p)| hit_at(&p.ranked, &truth[i], k))
            .count();
        hits as f64 / self.test.len() as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MvReport {
    pub feature_mode: FeatureMode,
    pub runs: Vec<MvRun>,
    pub mean_accuracy: f64,
}

impl MvReport {
    /// Mean over runs of the Top-k hit rate against `truth`.
    pub fn hit_rate_against(&self, truth: &[LabelSet], k: usize) -> f64 {
        self.runs.iter().map(|r| r.hit_rate_against(truth, k)).sum::<f64>() / self.runs.len() as f64
    }

    pub fn hit_rate(&self, meta: &[MetaRecord], k: usize) -> f64 {
        let truth: Vec<LabelSet> = meta.iter().map(|r| r.label_set.clone()).collect();
        self.hit_rate_against(&truth, k)
    }
}

fn train_members(
    meta: &[MetaRecord],
    rows: &[usize],
    mode: FeatureMode,
    classifiers: &[ClassifierId],
    seeds: impl Fn(ClassifierId) -> u64 + Sync,
    counter: Option<&CostCounter>,
) -> Result<Vec<TrainedClassifier>> {
    let (x, y) = design(meta, rows, mode);
    classifiers
        .par_iter()
        .map(|&c| {
            let m = train_base(c, x.view(), &y, seeds(c))?;
            if let Some(k) = counter {
                k.add_trainings(1);
            }
            Ok(m)
        })
        .collect()
}

/// `runs` repetitions of: stratified split, train all 14 on the training
/// part, majority-vote the test part.
pub fn mv_evaluate(
    meta: &[MetaRecord],
    mode: FeatureMode,
    runs: usize,
    split_seed_base: u64,
    counter: Option<&CostCounter>,
) -> Result<MvReport> {
    if runs == 0 {
        return Err(Error::InvalidArgument("at least one run is needed".into()));
    }
    if meta.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "majority-vote evaluation needs at least 10 records, got {}",
            meta.len()
        )));
    }
    let mut out = Vec::with_capacity(runs);
    for r in 0..runs {
        let run_seed = seed::derive(split_seed_base, &[r as u64]);
        let (split_seed, train, test) = (0..MAX_SPLIT_ATTEMPTS)
            .map(|a| {
                let s = seed::derive(run_seed, &[a]);
                let (tr, te) = stratified_split(meta, s);
                (s, tr, te)
            })
            .find(|(s, tr, _)| {
                let first = meta[tr[0]].target;
                let ok = tr.iter().any(|&i| meta[i].target != first);
                if !ok {
                    log::warn!("split seed {s:#x} gives a single-class training set, resampling");
                }
                ok
            })
            .ok_or_else(|| Error::Split("no split with two training classes".into()))?;
        let members = train_members(
            meta,
            &train,
            mode,
            &ClassifierId::ALL,
            |c| seed::derive(run_seed, &[c.index() as u64]),
            counter,
        )?;
        let mut ties = 0;
        let predictions: Vec<Recommendation> = test
            .iter()
            .map(|&i| {
                let v = majority_vote(&members, &meta[i].features_for(mode));
                if v.tie {
                    log::debug!("run {r}: vote tie on {}", meta[i].dataset_name);
                    ties += 1;
                }
                Recommendation::from_pairs(&v.ranking(), TOP_K_MAX)
            })
            .collect();
        let hits = test
            .iter()
            .zip(&predictions)
            .filter(|(&i, p)| hit_at(&p.ranked, &meta[i].label_set, 1))
            .count();
        out.push(MvRun {
            split_seed,
            accuracy: hits as f64 / test.len() as f64,
            test,
            predictions,
            ties,
        });
    }
    let mean_accuracy = out.iter().map(|r| r.accuracy).sum::<f64>() / runs as f64;
    Ok(MvReport {
        feature_mode: mode,
        runs: out,
        mean_accuracy,
    })
}

/// Leave-one-out results for one (classifier, feature mode) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoocvCell {
    pub classifier: ClassifierId,
    pub feature_mode: FeatureMode,
    /// Hits at k = 1, 2, 3.
    pub hits: [usize; TOP_K_MAX],
    pub accuracy: f64,
    /// Held-out rankings in record order.
    #[serde(skip)]
    pub rankings: Vec<Vec<CircuitId>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoocvReport {
    pub n_records: usize,
    /// Classifier-major, modes in the order given.
    pub cells: Vec<LoocvCell>,
    pub winner: (ClassifierId, FeatureMode),
    pub winner_accuracy: f64,
}

impl LoocvReport {
    pub fn cell(&self, c: ClassifierId, mode: FeatureMode) -> Option<&LoocvCell> {
        self.cells.iter().find(|x| x.classifier == c && x.feature_mode == mode)
    }
}

/// Leave-one-out over every (classifier, mode) pair, returning the grid and
/// the first strictly best pair in classifier then mode order.
pub fn loocv_evaluate(
    meta: &[MetaRecord],
    modes: &[FeatureMode],
    classifiers: &[ClassifierId],
    base_seed: u64,
    counter: Option<&CostCounter>,
) -> Result<LoocvReport> {
    let n = meta.len();
    if n < 3 {
        return Err(Error::InvalidArgument(format!("leave-one-out needs at least 3 records, got {n}")));
    }
    if modes.is_empty() || classifiers.is_empty() {
        return Err(Error::InvalidArgument("empty classifier or mode list".into()));
    }
    let units: Vec<(usize, usize, usize)> = (0..classifiers.len())
        .flat_map(|h| (0..modes.len()).flat_map(move |m| (0..n).map(move |i| (h, m, i))))
        .collect();
    let rankings: Vec<Vec<CircuitId>> = units
        .par_iter()
        .map(|&(h, m, i)| {
            let c = classifiers[h];
            let mode = modes[m];
            let rows: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let (x, y) = design(meta, &rows, mode);
            let s = seed::derive(base_seed, &[c.index() as u64, m as u64, i as u64]);
            let model = train_base(c, x.view(), &y, s)?;
            if let Some(k) = counter {
                k.add_trainings(1);
            }
            Ok(model
                .ranking(&meta[i].features_for(mode))
                .into_iter()
                .take(TOP_K_MAX)
                .map(|(c, _)| CircuitId::ALL[c])
                .collect())
        })
        .collect::<Result<_>>()?;
    let mut cells = Vec::with_capacity(classifiers.len() * modes.len());
    let mut best: Option<(usize, f64)> = None;
    for (cell_idx, chunk) in rankings.chunks(n).enumerate() {
        let (h, m) = (cell_idx / modes.len(), cell_idx % modes.len());
        let mut hits = [0; TOP_K_MAX];
        for (i, r) in chunk.iter().enumerate() {
            for (k, h) in hits.iter_mut().enumerate() {
                if hit_at(r, &meta[i].label_set, k + 1) {
                    *h += 1;
                }
            }
        }
        let accuracy = hits[0] as f64 / n as f64;
        if best.is_none_or(|(_, a)| accuracy > a) {
            best = Some((cell_idx, accuracy));
        }
        cells.push(LoocvCell {
            classifier: classifiers[h],
            feature_mode: modes[m],
            hits,
            accuracy,
            rankings: chunk.to_vec(),
        });
    }
    let (bi, winner_accuracy) = best.expect("non-empty grid");
    Ok(LoocvReport {
        n_records: n,
        winner: (cells[bi].classifier, cells[bi].feature_mode),
        winner_accuracy,
        cells,
    })
}

/// A trained recommender, serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommender {
    pub format_version: u32,
    pub strategy: Strategy,
    pub feature_mode: FeatureMode,
    pub global_seed: u64,
    pub members: Vec<TrainedClassifier>,
}

impl Recommender {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let r: Recommender = serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))?;
        if r.format_version != RECOMMENDER_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "recommender format version {} is not supported (expected {RECOMMENDER_FORMAT_VERSION})",
                r.format_version
            )));
        }
        let expected = match r.strategy {
            Strategy::Mv => ClassifierId::ALL.len(),
            Strategy::Loocv => 1,
        };
        if r.members.len() != expected {
            return Err(Error::Format(format!(
                "{} recommender with {} members",
                r.strategy,
                r.members.len()
            )));
        }
        Ok(r)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let s = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }

    /// Full ranking for a raw feature vector of this recommender's width.
    pub fn rank(&self, x: &[f64]) -> Result<Vec<(usize, f64)>> {
        if x.len() != self.feature_mode.width() {
            return Err(Error::Dimension(format!(
                "recommender expects {} features, got {}",
                self.feature_mode.width(),
                x.len()
            )));
        }
        Ok(match self.strategy {
            Strategy::Mv => majority_vote(&self.members, x).ranking(),
            Strategy::Loocv => self.members[0].ranking(x),
        })
    }
}

/// Trains the final recommender on the whole meta-dataset. LOOCV needs the
/// winning classifier.
pub fn train_final(
    meta: &[MetaRecord],
    strategy: Strategy,
    feature_mode: FeatureMode,
    classifier: Option<ClassifierId>,
    global_seed: u64,
    counter: Option<&CostCounter>,
) -> Result<Recommender> {
    let classifiers: Vec<ClassifierId> = match (strategy, classifier) {
        (Strategy::Mv, _) => ClassifierId::ALL.to_vec(),
        (Strategy::Loocv, Some(c)) => vec![c],
        (Strategy::Loocv, None) => {
            return Err(Error::InvalidArgument("LOOCV training needs the winning classifier".into()))
        }
    };
    let rows: Vec<usize> = (0..meta.len()).collect();
    let members = train_members(
        meta,
        &rows,
        feature_mode,
        &classifiers,
        |c| seed::derive(global_seed, &[c.index() as u64]),
        counter,
    )?;
    Ok(Recommender {
        format_version: RECOMMENDER_FORMAT_VERSION,
        strategy,
        feature_mode,
        global_seed,
        members,
    })
}

/// Top-k circuits for a complexity vector; circuits with no support are
/// omitted, so fewer than `k` may come back.
pub fn recommend_topk(f: &Recommender, x: &ComplexityVector, k: usize) -> Result<Recommendation> {
    if !(1..=N_CLASSES).contains(&k) {
        return Err(Error::InvalidArgument(format!("k must lie in [1, {N_CLASSES}], got {k}")));
    }
    if x.mode() != Some(f.feature_mode) {
        return Err(Error::ModeMismatch {
            expected: f.feature_mode.to_string(),
            got: x.mode().map_or_else(|| format!("{} metrics", x.len()), |m| m.to_string()),
        });
    }
    Ok(Recommendation::from_pairs(&f.rank(&x.values)?, k))
}

/// Training counts of the two strategies and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRatio {
    pub ratio: f64,
    pub mv_trainings: u64,
    pub loocv_trainings: u64,
}

/// `(R * H) / (H * N)`.
pub fn cost_ratio(runs: u64, classifiers: u64, records: u64) -> CostRatio {
    let mv = runs * classifiers;
    let loocv = classifiers * records;
    CostRatio {
        ratio: mv as f64 / loocv as f64,
        mv_trainings: mv,
        loocv_trainings: loocv,
    }
}
