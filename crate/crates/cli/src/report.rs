//! Human-readable tables and their machine-readable counterparts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyhow::Result;
use qkrec::evaluator::LabelMode;
use qkrec::metalearn::{ClassifierId, LoocvReport, MetaRecord, MvReport, TOP_K_MAX};
use qkrec::qsim::CircuitId;
use serde::Serialize;

use crate::pipeline::{DatasetResult, TrainOutcome, VerifyRow};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InventoryRow {
    pub group: String,
    pub kind: &'static str,
    pub count: usize,
    pub min_samples: usize,
    pub max_samples: usize,
}

/// Dataset counts per family, synthetic groups first.
pub fn inventory(results: &[DatasetResult]) -> Vec<InventoryRow> {
    let mut rows: Vec<InventoryRow> = Vec::new();
    for r in results {
        let kind = if r.synthetic { "synthetic" } else { "real" };
        match rows.iter_mut().find(|x| x.group == r.group) {
            Some(row) => {
                row.count += 1;
                row.min_samples = row.min_samples.min(r.n_samples);
                row.max_samples = row.max_samples.max(r.n_samples);
            }
            None => rows.push(InventoryRow {
                group: r.group.clone(),
                kind,
                count: 1,
                min_samples: r.n_samples,
                max_samples: r.n_samples,
            }),
        }
    }
    rows.sort_by_key(|r| r.kind != "synthetic");
    rows
}

pub fn inventory_text(rows: &[InventoryRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{:<16} {:<10} {:>9} {:>10}", "Dataset", "Type", "#Datasets", "Samples");
    for r in rows {
        let _ = writeln!(
            s,
            "{:<16} {:<10} {:>9} {:>10}",
            r.group,
            r.kind,
            r.count,
            format!("{}-{}", r.min_samples, r.max_samples)
        );
    }
    let synth: usize = rows.iter().filter(|r| r.kind == "synthetic").map(|r| r.count).sum();
    let real: usize = rows.iter().filter(|r| r.kind == "real").map(|r| r.count).sum();
    let _ = writeln!(s, "Total: {} ({synth} synthetic, {real} real)", synth + real);
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyRow {
    pub circuit: CircuitId,
    pub single: usize,
    pub tied: usize,
}

/// How often each circuit appears in the label sets under both rules.
pub fn frequency(records: &[MetaRecord], epsilon: f64, global_seed: u64) -> Result<Vec<FrequencyRow>> {
    let mut rows: Vec<FrequencyRow> = CircuitId::ALL
        .iter()
        .map(|&circuit| FrequencyRow {
            circuit,
            single: 0,
            tied: 0,
        })
        .collect();
    for r in records {
        for c in r.relabel(LabelMode::Single, epsilon, global_seed)?.label_set.circuits {
            rows[c.index()].single += 1;
        }
        for c in r.relabel(LabelMode::Tied, epsilon, global_seed)?.label_set.circuits {
            rows[c.index()].tied += 1;
        }
    }
    Ok(rows)
}

pub fn frequency_text(rows: &[FrequencyRow], epsilon: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Frequency of each circuit appearing in the label sets (epsilon = {epsilon})");
    let _ = writeln!(s, "{:<10} {:>16} {:>14}", "Circuit", "SINGLE-BEST-OUT", "TIED-BEST-OUT");
    for r in rows {
        let _ = writeln!(s, "{:<10} {:>16} {:>14}", r.circuit.as_str(), r.single, r.tied);
    }
    let single: usize = rows.iter().map(|r| r.single).sum();
    let tied: usize = rows.iter().map(|r| r.tied).sum();
    let _ = writeln!(s, "{:<10} {:>16} {:>14}", "#Samples", single, tied);
    s
}

pub fn mv_text(rep: &MvReport, records: &[MetaRecord]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Majority vote, feature mode {}", rep.feature_mode);
    let _ = writeln!(s, "{:<5} {:>9} {:>9} {:>9} {:>6}", "Run", "Top-1", "Top-2", "Top-3", "Ties");
    let truth: Vec<_> = records.iter().map(|r| r.label_set.clone()).collect();
    for (i, run) in rep.runs.iter().enumerate() {
        let _ = writeln!(
            s,
            "{:<5} {:>9.4} {:>9.4} {:>9.4} {:>6}",
            i + 1,
            run.hit_rate_against(&truth, 1),
            run.hit_rate_against(&truth, 2),
            run.hit_rate_against(&truth, 3),
            run.ties
        );
    }
    let _ = writeln!(
        s,
        "{:<5} {:>9.4} {:>9.4} {:>9.4}",
        "Mean",
        rep.mean_accuracy,
        rep.hit_rate_against(&truth, 2),
        rep.hit_rate_against(&truth, 3)
    );
    s
}

pub fn loocv_text(rep: &LoocvReport) -> String {
    let mut modes = Vec::new();
    for c in &rep.cells {
        if !modes.contains(&c.feature_mode) {
            modes.push(c.feature_mode);
        }
    }
    let mut s = String::new();
    let _ = writeln!(s, "Leave-one-out Top-1 accuracy over {} records", rep.n_records);
    let _ = write!(s, "{:<16}", "Mode");
    for c in ClassifierId::ALL {
        let _ = write!(s, " {:>6}", c.as_str());
    }
    let _ = writeln!(s);
    for m in &modes {
        let _ = write!(s, "{:<16}", mode_label(*m));
        for c in ClassifierId::ALL {
            match rep.cell(c, *m) {
                Some(cell) => {
                    let _ = write!(s, " {:>6.3}", cell.accuracy);
                }
                None => {
                    let _ = write!(s, " {:>6}", "-");
                }
            }
        }
        let _ = writeln!(s);
    }
    let (wc, wm) = rep.winner;
    let _ = writeln!(s, "Winner: {wc} with {wm} (accuracy {:.4})", rep.winner_accuracy);
    if let Some(cell) = rep.cell(wc, wm) {
        let rates: Vec<String> = (0..TOP_K_MAX)
            .map(|k| format!("Top-{} {:.4}", k + 1, cell.hits[k] as f64 / rep.n_records as f64))
            .collect();
        let _ = writeln!(s, "Winner hit rates: {}", rates.join(", "));
    }
    s
}

fn mode_label(m: qkrec::complexity::FeatureMode) -> String {
    match m {
        qkrec::complexity::FeatureMode::AllIn => "ALL-IN".into(),
        qkrec::complexity::FeatureMode::SingleIn(x) => x.to_string(),
    }
}

/// Per-cell CSV of the leave-one-out grid.
pub fn loocv_csv(rep: &LoocvReport) -> String {
    let mut s = String::from("classifier,feature_mode,top1_hits,top2_hits,top3_hits,accuracy\n");
    for c in &rep.cells {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            c.classifier, c.feature_mode, c.hits[0], c.hits[1], c.hits[2], c.accuracy
        );
    }
    s
}

pub fn train_text(out: &TrainOutcome, records: &[MetaRecord]) -> String {
    let mut s = match &out.evaluation {
        crate::pipeline::Evaluation::Mv(r) => mv_text(r, records),
        crate::pipeline::Evaluation::Loocv(r) => loocv_text(r),
    };
    let _ = writeln!(
        s,
        "Trainings: evaluation {}, final {}",
        out.evaluation_trainings, out.final_trainings
    );
    let _ = writeln!(
        s,
        "Cost: MV R*H = {}, LOOCV H*N = {}, ratio {:.4}",
        out.formula.mv_trainings, out.formula.loocv_trainings, out.formula.ratio
    );
    s
}

fn join(c: &[CircuitId]) -> String {
    c.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", ")
}

fn mark(h: Option<bool>) -> &'static str {
    match h {
        Some(true) => "hit",
        Some(false) => "miss",
        None => "-",
    }
}

pub fn verify_text(rows: &[VerifyRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<20} {:<10} {:<28} {:<44} {:<6} {:<6}",
        "Dataset", "Top-1", "Top-k", "Truth", "@1", "@k"
    );
    for r in rows {
        let truth = r.truth.as_ref().map_or_else(
            || {
                r.best_evaluated()
                    .map_or("-".into(), |b| format!("best of list: {} ({:.3})", b.circuit_id, b.best_accuracy))
            },
            |t| join(&t.circuits),
        );
        let _ = writeln!(
            s,
            "{:<20} {:<10} {:<28} {:<44} {:<6} {:<6}",
            r.dataset,
            r.recommendation.top1().map_or("-", |c| c.as_str()),
            join(&r.recommendation.ranked),
            truth,
            mark(r.hit_top1),
            mark(r.hit_topk)
        );
    }
    let judged: Vec<&VerifyRow> = rows.iter().filter(|r| r.truth.is_some()).collect();
    if !judged.is_empty() {
        let n = judged.len();
        let h1 = judged.iter().filter(|r| r.hit_top1 == Some(true)).count();
        let hk = judged.iter().filter(|r| r.hit_topk == Some(true)).count();
        let pct = |h: usize| 100.0 * h as f64 / n as f64;
        let _ = writeln!(s, "Top-1 accuracy: {h1}/{n} ({:.1}%)", pct(h1));
        let _ = writeln!(s, "Top-k accuracy: {hk}/{n} ({:.1}%)", pct(hk));
    }
    let simulated: usize = rows.iter().map(|r| r.evaluated.len()).sum();
    let _ = writeln!(s, "Circuits simulated: {simulated} across {} datasets", rows.len());
    s
}

/// Group counts keyed by inventory group, for quick checks.
pub fn group_counts(rows: &[InventoryRow]) -> BTreeMap<String, usize> {
    rows.iter().map(|r| (r.group.clone(), r.count)).collect()
}
