//! Subcommand bodies. Each writes its artifacts under the output directory
//! and returns the process exit code.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qkrec::cost::CostCounter;
use qkrec::metalearn::{Recommendation, Recommender};
use qkrec::qsim::{CircuitId, EncodingCircuit, GateKind, Structure};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::events::EventLog;
use crate::metafile::{self, MetaManifest, META_FORMAT_VERSION};
use crate::pipeline::{self, BuildOutcome, TrainOutcome, VerifyRow, MAX_FAILURE_FRACTION};
use crate::report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_FAILURE_THRESHOLD: i32 = 2;

pub const META_FILE: &str = "meta.csv";
pub const RECOMMENDER_FILE: &str = "recommender.json";

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write(path: PathBuf, text: impl AsRef<[u8]>) -> Result<()> {
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn write_json(path: PathBuf, value: &impl Serialize) -> Result<()> {
    write(path, serde_json::to_string_pretty(value)? + "\n")
}

/// Builds the meta-dataset and its reports.
pub fn build_meta(cfg: &PipelineConfig) -> Result<(BuildOutcome, i32)> {
    let out = &cfg.output_dir;
    ensure_dir(out)?;
    let events = EventLog::create(&out.join("events.jsonl"))?;
    let outcome = pipeline::build_meta(cfg, &events)?;
    events.flush();
    let records = outcome.records();
    metafile::write_meta(
        &out.join(META_FILE),
        &records,
        &MetaManifest {
            format_version: META_FORMAT_VERSION,
            global_seed: cfg.global_seed,
            labeling_mode: cfg.labeling_mode,
            epsilon: cfg.epsilon,
            n_records: records.len(),
        },
    )?;
    let scores: Vec<(String, _)> = outcome
        .results
        .iter()
        .map(|r| (r.name.clone(), r.scores.clone()))
        .collect();
    metafile::write_scores(&out.join("scores.csv"), &scores)?;
    metafile::write_features(&out.join("features.csv"), &records)?;

    let inventory = report::inventory(&outcome.results);
    let inventory_text = report::inventory_text(&inventory);
    write(out.join("inventory.txt"), &inventory_text)?;
    write_json(out.join("inventory.json"), &inventory)?;
    let freq = report::frequency(&records, cfg.epsilon, cfg.global_seed)?;
    let freq_text = report::frequency_text(&freq, cfg.epsilon);
    write(out.join("frequency.txt"), &freq_text)?;
    write_json(out.join("frequency.json"), &freq)?;
    println!("{inventory_text}\n{freq_text}");
    println!(
        "Simulated {} Gram matrices ({} kernel evaluations); {} of {} datasets failed",
        outcome.cost.gram_matrices,
        outcome.cost.kernel_evaluations,
        outcome.failures.len(),
        outcome.attempted
    );
    let code = if outcome.failure_fraction() > MAX_FAILURE_FRACTION {
        eprintln!(
            "error: {:.1}% of datasets failed (limit {:.0}%)",
            100.0 * outcome.failure_fraction(),
            100.0 * MAX_FAILURE_FRACTION
        );
        EXIT_FAILURE_THRESHOLD
    } else {
        EXIT_OK
    };
    Ok((outcome, code))
}

/// Runs the configured strategy on a meta-dataset and saves the recommender.
pub fn train(cfg: &PipelineConfig, meta: Option<&Path>) -> Result<TrainOutcome> {
    let meta_path = meta.map_or_else(|| cfg.output_dir.join(META_FILE), Path::to_path_buf);
    let (records, _) = metafile::read_meta(&meta_path)?;
    let records = pipeline::relabel(&records, cfg)?;
    let outcome = pipeline::train(cfg, &records)?;
    ensure_dir(&cfg.output_dir)?;
    outcome.recommender.save(cfg.output_dir.join(RECOMMENDER_FILE))?;
    let text = report::train_text(&outcome, &records);
    write(cfg.output_dir.join("train_report.txt"), &text)?;
    write_json(cfg.output_dir.join("train_report.json"), &outcome)?;
    if let pipeline::Evaluation::Loocv(rep) = &outcome.evaluation {
        write(cfg.output_dir.join("loocv_grid.csv"), report::loocv_csv(rep))?;
    }
    println!("{text}");
    Ok(outcome)
}

#[derive(Debug, Clone, Serialize)]
pub struct RecommendOutput {
    pub dataset: String,
    pub strategy: String,
    pub feature_mode: String,
    pub k: usize,
    pub recommendation: Recommendation,
}

/// Prints the ranked list; no circuit is simulated.
pub fn recommend(cfg: &PipelineConfig, recommender: &Path, dataset: &Path, json: bool) -> Result<RecommendOutput> {
    let f = Recommender::load(recommender)?;
    let d = pipeline::load_dataset_csv(dataset)?;
    let (_, rec) = pipeline::recommend(&f, &d, cfg.k)?;
    let out = RecommendOutput {
        dataset: d.name.clone(),
        strategy: f.strategy.to_string(),
        feature_mode: f.feature_mode.to_string(),
        k: cfg.k,
        recommendation: rec,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!("Top-{} circuits for {} ({} / {}):", cfg.k, out.dataset, out.strategy, out.feature_mode);
        for (i, (c, v)) in out.recommendation.ranked.iter().zip(&out.recommendation.votes).enumerate() {
            println!("{:>2}. {:<10} {}", i + 1, c.as_str(), v);
        }
    }
    ensure_dir(&cfg.output_dir)?;
    write_json(cfg.output_dir.join(format!("recommend_{}.json", out.dataset)), &out)?;
    Ok(out)
}

/// Which datasets `verify` checks.
pub enum VerifyTargets<'a> {
    Files(&'a [PathBuf]),
    Holdout,
}

pub fn verify(
    cfg: &PipelineConfig,
    recommender: &Path,
    targets: VerifyTargets<'_>,
    recommended_only: bool,
) -> Result<(Vec<VerifyRow>, CostCounter)> {
    let f = Recommender::load(recommender)?;
    let datasets = match targets {
        VerifyTargets::Files(paths) => {
            if paths.is_empty() {
                bail!("no dataset given; pass --dataset or --holdout");
            }
            paths
                .iter()
                .map(|p| pipeline::load_dataset_csv(p))
                .collect::<Result<Vec<_>>>()?
        }
        VerifyTargets::Holdout => pipeline::load_manifest(cfg)?
            .holdout_entries()?
            .iter()
            .map(|h| Ok(h.materialize()?))
            .collect::<Result<Vec<_>>>()?,
    };
    let counter = CostCounter::new();
    let rows = datasets
        .iter()
        .map(|d| pipeline::verify(&f, d, cfg, recommended_only, Some(&counter)))
        .collect::<Result<Vec<_>>>()?;
    let text = report::verify_text(&rows);
    ensure_dir(&cfg.output_dir)?;
    write(cfg.output_dir.join("verify_report.txt"), &text)?;
    write_json(cfg.output_dir.join("verify_report.json"), &rows)?;
    println!("{text}");
    Ok((rows, counter))
}

/// Reference structure of every circuit: parameters, gates, depth and the
/// two-qubit gate.
pub fn reference_structure(id: CircuitId) -> Structure {
    let (n_params, n_gates, depth, two_qubit_gate) = match id {
        CircuitId::SRx => (0, 8, 2, None),
        CircuitId::HERx => (0, 14, 8, Some(GateKind::CX)),
        CircuitId::ZFM => (0, 16, 4, None),
        CircuitId::ZZFM => (0, 34, 22, Some(GateKind::CX)),
        CircuitId::HD => (0, 31, 9, Some(GateKind::SQISW)),
        CircuitId::YzCx => (16, 20, 6, Some(GateKind::CX)),
        CircuitId::HzyCz => (16, 28, 13, Some(GateKind::CRZ)),
        CircuitId::PZFM => (8, 22, 10, Some(GateKind::CX)),
        CircuitId::Chebyshev => (24, 24, 10, Some(GateKind::CRZ)),
    };
    Structure {
        n_params,
        n_gates,
        depth,
        two_qubit_gate,
    }
}

/// Prints each circuit's structure next to the reference; true when all match.
pub fn audit_circuits() -> bool {
    println!(
        "{:<10} {:>7} {:>6} {:>6} {:>8}  status",
        "Circuit", "#Params", "#Gates", "Depth", "2Q gate"
    );
    let mut ok = true;
    for c in EncodingCircuit::all_default() {
        let s = c.structure();
        let matches = s == reference_structure(c.id);
        ok &= matches;
        println!(
            "{:<10} {:>7} {:>6} {:>6} {:>8}  {}",
            c.id.as_str(),
            s.n_params,
            s.n_gates,
            s.depth,
            s.two_qubit_gate.map_or("-".to_string(), |g| g.to_string()),
            if matches { "ok" } else { "MISMATCH" }
        );
    }
    ok
}
