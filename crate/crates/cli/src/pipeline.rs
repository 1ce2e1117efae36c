//! The pipeline stages behind the subcommands.

use std::path::Path;

use anyhow::{Context, Result};
use qkrec::complexity::{self, ComplexityVector, FeatureMode};
use qkrec::cost::{CostCounter, CostSnapshot};
use qkrec::datagen::{self, DatasetManifest, DatasetSpec, LabeledDataset};
use qkrec::evaluator::{self, CircuitScore, LabelSet};
use qkrec::metalearn::{
    self, cost_ratio, label_seed, loocv_evaluate, mv_evaluate, recommend_topk, train_final, ClassifierId,
    CostRatio, LoocvReport, MetaRecord, MvReport, Recommendation, Recommender, Strategy,
};
use qkrec::qsim::{CircuitId, EncodingCircuit};
use qkrec::seed;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::PipelineConfig;
use crate::events::EventLog;

/// Share of failed datasets above which `build-meta` reports failure.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;

const PREPROCESS_STREAM: u64 = 1;
const EVALUATION_STREAM: u64 = 2;
const TRAINING_STREAM: u64 = 3;

/// Seed of the train/test split used when scoring circuits on a dataset.
pub fn split_seed(global_seed: u64, dataset_name: &str) -> u64 {
    seed::derive(global_seed, &[PREPROCESS_STREAM, seed::hash_str(dataset_name)])
}

/// Circuit scores and complexity features of one dataset.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetResult {
    pub name: String,
    pub group: String,
    pub synthetic: bool,
    pub n_samples: usize,
    pub n_features: usize,
    pub scores: Vec<CircuitScore>,
    pub record: MetaRecord,
}

/// Scores `circuits` on `d` with every kernel classifier.
pub fn score_dataset(
    d: &LabeledDataset,
    circuits: &[EncodingCircuit],
    global_seed: u64,
    counter: Option<&CostCounter>,
) -> Result<Vec<CircuitScore>> {
    let p = datagen::preprocess(d, split_seed(global_seed, &d.name))?;
    Ok(evaluator::score_circuits(&p, circuits, counter)?)
}

pub fn evaluate_dataset(
    spec: &DatasetSpec,
    cfg: &PipelineConfig,
    circuits: &[EncodingCircuit],
    counter: Option<&CostCounter>,
) -> Result<DatasetResult> {
    let d = spec.materialize()?;
    let scores = score_dataset(&d, circuits, cfg.global_seed, counter)?;
    let features = complexity::extract(&d, FeatureMode::AllIn)?;
    let record = MetaRecord::new(
        &spec.name,
        features.values,
        &scores,
        cfg.labeling_mode,
        cfg.epsilon,
        cfg.global_seed,
    )?;
    Ok(DatasetResult {
        name: spec.name.clone(),
        group: spec.group.clone(),
        synthetic: spec.synthetic,
        n_samples: d.n_samples(),
        n_features: d.n_features(),
        scores,
        record,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BuildOutcome {
    pub results: Vec<DatasetResult>,
    pub failures: Vec<(String, String)>,
    pub attempted: usize,
    pub cost: CostSnapshot,
}

impl BuildOutcome {
    pub fn failure_fraction(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.failures.len() as f64 / self.attempted as f64
        }
    }

    pub fn records(&self) -> Vec<MetaRecord> {
        self.results.iter().map(|r| r.record.clone()).collect()
    }
}

pub fn load_manifest(cfg: &PipelineConfig) -> Result<DatasetManifest> {
    Ok(DatasetManifest::from_path(&cfg.manifest)?)
}

/// Evaluates every manifest entry. Per-dataset failures are logged and
/// skipped; manifest errors abort.
pub fn build_meta(cfg: &PipelineConfig, events: &EventLog) -> Result<BuildOutcome> {
    let manifest = load_manifest(cfg)?;
    let specs = manifest.entries()?;
    let circuits = EncodingCircuit::all_default();
    let counter = CostCounter::new();
    let outcomes: Vec<Result<DatasetResult>> = specs
        .par_iter()
        .map(|s| evaluate_dataset(s, cfg, &circuits, Some(&counter)))
        .collect();
    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (spec, outcome) in specs.iter().zip(outcomes) {
        match outcome {
            Ok(r) => {
                log_dataset_events(&r, events);
                results.push(r);
            }
            Err(e) => {
                log::warn!("skipping {}: {e:#}", spec.name);
                events.emit("dataset_skipped", json!({ "dataset": spec.name, "reason": format!("{e:#}") }));
                failures.push((spec.name.clone(), format!("{e:#}")));
            }
        }
    }
    Ok(BuildOutcome {
        results,
        failures,
        attempted: specs.len(),
        cost: counter.snapshot(),
    })
}

fn log_dataset_events(r: &DatasetResult, events: &EventLog) {
    for s in &r.scores {
        for f in &s.failures {
            events.emit(
                "classifier_failure",
                json!({ "dataset": r.name, "circuit": s.circuit_id, "classifier": f.as_str() }),
            );
        }
    }
    let best = r.record.best_accuracy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tied: Vec<&str> = CircuitId::ALL
        .iter()
        .filter(|c| r.record.best_accuracy[c.index()] == best)
        .map(|c| c.as_str())
        .collect();
    if tied.len() > 1 {
        events.emit(
            "label_tie",
            json!({ "dataset": r.name, "accuracy": best, "circuits": tied, "chosen": r.record.target }),
        );
    }
}

/// Result of the chosen strategy's evaluation phase.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "strategy")]
pub enum Evaluation {
    #[serde(rename = "MV")]
    Mv(MvReport),
    #[serde(rename = "LOOCV")]
    Loocv(LoocvReport),
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainOutcome {
    pub evaluation: Evaluation,
    #[serde(skip)]
    pub recommender: Recommender,
    /// Trainings spent in the evaluation phase only.
    pub evaluation_trainings: u64,
    pub final_trainings: u64,
    /// Closed-form counts for R runs and N records.
    pub formula: CostRatio,
}

/// Records relabeled under the configured label mode and tie margin.
pub fn relabel(records: &[MetaRecord], cfg: &PipelineConfig) -> Result<Vec<MetaRecord>> {
    Ok(records
        .iter()
        .map(|r| r.relabel(cfg.labeling_mode, cfg.epsilon, cfg.global_seed))
        .collect::<qkrec::Result<Vec<_>>>()?)
}

/// Evaluation phase followed by final training on the whole meta-dataset.
pub fn train(cfg: &PipelineConfig, records: &[MetaRecord]) -> Result<TrainOutcome> {
    let eval_counter = CostCounter::new();
    let base = seed::derive(cfg.global_seed, &[EVALUATION_STREAM]);
    let (evaluation, mode, winner) = match cfg.strategy {
        Strategy::Mv => {
            let rep = mv_evaluate(records, cfg.feature_mode, cfg.runs, base, Some(&eval_counter))?;
            (Evaluation::Mv(rep), cfg.feature_mode, None)
        }
        Strategy::Loocv => {
            let rep = loocv_evaluate(
                records,
                &cfg.loocv_grid.modes(),
                &ClassifierId::ALL,
                base,
                Some(&eval_counter),
            )?;
            let (c, m) = rep.winner;
            (Evaluation::Loocv(rep), m, Some(c))
        }
    };
    let final_counter = CostCounter::new();
    let recommender = train_final(
        records,
        cfg.strategy,
        mode,
        winner,
        seed::derive(cfg.global_seed, &[TRAINING_STREAM]),
        Some(&final_counter),
    )?;
    let recommender = Recommender {
        global_seed: cfg.global_seed,
        ..recommender
    };
    Ok(TrainOutcome {
        evaluation,
        recommender,
        evaluation_trainings: eval_counter.trainings(),
        final_trainings: final_counter.trainings(),
        formula: cost_ratio(cfg.runs as u64, ClassifierId::ALL.len() as u64, records.len() as u64),
    })
}

/// Reads a dataset CSV: numeric feature columns then a two-valued label.
pub fn load_dataset_csv(path: &Path) -> Result<LabeledDataset> {
    let table = datagen::load_csv(path, None)?;
    let (features, labels) = table.binarize_two_valued()?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let mut provenance = std::collections::BTreeMap::new();
    provenance.insert("source".to_string(), path.display().to_string());
    LabeledDataset::new(name, features, labels, provenance, 0)
        .with_context(|| format!("loading {}", path.display()))
}

/// Complexity features only; no circuit is simulated.
pub fn recommend(f: &Recommender, d: &LabeledDataset, k: usize) -> Result<(ComplexityVector, Recommendation)> {
    let x = complexity::extract(d, f.feature_mode)?;
    let rec = recommend_topk(f, &x, k)?;
    Ok((x, rec))
}

/// One verification row: recommended circuits against simulated truth.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub dataset: String,
    pub recommendation: Recommendation,
    /// Scores of the circuits that were simulated.
    pub evaluated: Vec<CircuitScore>,
    /// Ground truth; absent when only recommended circuits were simulated.
    pub truth: Option<LabelSet>,
    pub hit_top1: Option<bool>,
    pub hit_topk: Option<bool>,
}

impl VerifyRow {
    /// Best recommended circuit by measured accuracy, canonical order on ties.
    pub fn best_evaluated(&self) -> Option<&CircuitScore> {
        self.evaluated
            .iter()
            .filter(|s| self.recommendation.ranked.contains(&s.circuit_id))
            .fold(None, |best: Option<&CircuitScore>, s| match best {
                Some(b) if b.best_accuracy >= s.best_accuracy => Some(b),
                _ => Some(s),
            })
    }
}

/// Recommends for `d`, then simulates either all nine circuits (to derive
/// the ground truth) or only the recommended ones.
pub fn verify(
    f: &Recommender,
    d: &LabeledDataset,
    cfg: &PipelineConfig,
    recommended_only: bool,
    counter: Option<&CostCounter>,
) -> Result<VerifyRow> {
    let (_, rec) = recommend(f, d, cfg.k)?;
    let circuits: Vec<EncodingCircuit> = EncodingCircuit::all_default()
        .into_iter()
        .filter(|c| !recommended_only || rec.ranked.contains(&c.id))
        .collect();
    let mut evaluated = score_dataset(d, &circuits, cfg.global_seed, counter)?;
    evaluated.sort_by_key(|s| s.circuit_id);
    let truth = if recommended_only {
        None
    } else {
        Some(evaluator::label(
            &evaluated,
            cfg.labeling_mode,
            cfg.epsilon,
            label_seed(cfg.global_seed, &d.name),
        )?)
    };
    let hit_top1 = truth.as_ref().map(|t| metalearn::hit(&rec.truncated(1), t));
    let hit_topk = truth.as_ref().map(|t| metalearn::hit(&rec, t));
    Ok(VerifyRow {
        dataset: d.name.clone(),
        recommendation: rec,
        evaluated,
        truth,
        hit_top1,
        hit_topk,
    })
}
