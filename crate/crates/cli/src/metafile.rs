//! Meta-dataset files: `meta.csv` with its JSON sidecar, plus the per-circuit
//! score table and the feature table.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use qkrec::complexity::MetricId;
use qkrec::evaluator::{CircuitScore, LabelMode, LabelSet};
use qkrec::metalearn::{MetaRecord, N_CLASSES};
use qkrec::qsim::CircuitId;
use serde::{Deserialize, Serialize};

pub const META_FORMAT_VERSION: u32 = 1;

/// Settings needed to rebuild records from `meta.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaManifest {
    pub format_version: u32,
    pub global_seed: u64,
    pub labeling_mode: LabelMode,
    pub epsilon: f64,
    pub n_records: usize,
}

pub fn sidecar_path(meta: &Path) -> PathBuf {
    meta.with_extension("manifest.json")
}

fn header() -> Vec<String> {
    let mut h = vec!["dataset_name".to_string()];
    h.extend(MetricId::ALL.iter().map(|m| m.as_str().to_string()));
    h.push("label_set".into());
    h.extend(CircuitId::ALL.iter().map(|c| format!("acc_{}", c.as_str())));
    h
}

pub fn write_meta(path: &Path, records: &[MetaRecord], manifest: &MetaManifest) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header())?;
    for r in records {
        let mut row = vec![r.dataset_name.clone()];
        row.extend(r.features.iter().map(f64::to_string));
        row.push(r.label_set.signature());
        row.extend(r.best_accuracy.iter().map(f64::to_string));
        w.write_record(row)?;
    }
    w.flush()?;
    let side = sidecar_path(path);
    std::fs::write(&side, serde_json::to_string_pretty(manifest)? + "\n")
        .with_context(|| format!("writing {}", side.display()))?;
    Ok(())
}

/// Reads `meta.csv` and its sidecar, rebuilding each record's label set
/// from its accuracies and checking it against the stored one.
pub fn read_meta(path: &Path) -> Result<(Vec<MetaRecord>, MetaManifest)> {
    let side = sidecar_path(path);
    let manifest: MetaManifest = serde_json::from_str(
        &std::fs::read_to_string(&side).with_context(|| format!("reading {}", side.display()))?,
    )
    .with_context(|| format!("parsing {}", side.display()))?;
    ensure!(
        manifest.format_version == META_FORMAT_VERSION,
        "unsupported meta-dataset format version {}",
        manifest.format_version
    );
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let got: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    ensure!(got == header(), "{}: unexpected header", path.display());
    let n_feat = MetricId::ALL.len();
    let mut records = Vec::new();
    for (line, row) in rdr.records().enumerate() {
        let row = row.with_context(|| format!("{}: row {}", path.display(), line + 2))?;
        let num = |i: usize| -> Result<f64> {
            row[i]
                .parse::<f64>()
                .with_context(|| format!("{}: row {}, column {}", path.display(), line + 2, i + 1))
        };
        let features = (1..=n_feat).map(num).collect::<Result<Vec<f64>>>()?;
        let mut acc = [0.0; N_CLASSES];
        for (c, a) in acc.iter_mut().enumerate() {
            *a = num(n_feat + 2 + c)?;
        }
        let scores: Vec<CircuitScore> = CircuitId::ALL
            .iter()
            .map(|&c| CircuitScore::new(c, [acc[c.index()]; 3]))
            .collect();
        let record = MetaRecord::new(
            &row[0],
            features,
            &scores,
            manifest.labeling_mode,
            manifest.epsilon,
            manifest.global_seed,
        )?;
        let stored = LabelSet::parse_signature(&row[n_feat + 1], manifest.labeling_mode, manifest.epsilon)?;
        if stored.circuits != record.label_set.circuits {
            bail!(
                "{}: label set of `{}` ({}) disagrees with its accuracies ({})",
                path.display(),
                record.dataset_name,
                stored.signature(),
                record.label_set.signature()
            );
        }
        records.push(record);
    }
    ensure!(
        records.len() == manifest.n_records,
        "{}: {} records but the sidecar lists {}",
        path.display(),
        records.len(),
        manifest.n_records
    );
    Ok((records, manifest))
}

pub fn write_scores(path: &Path, rows: &[(String, Vec<CircuitScore>)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["dataset_name", "circuit_id", "acc_svc", "acc_gpc", "acc_krc", "acc_best"])?;
    for (name, scores) in rows {
        for s in scores {
            w.write_record([
                name.clone(),
                s.circuit_id.to_string(),
                s.accuracy[0].to_string(),
                s.accuracy[1].to_string(),
                s.accuracy[2].to_string(),
                s.best_accuracy.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_features(path: &Path, records: &[MetaRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    let mut h = vec!["dataset_name".to_string()];
    h.extend(MetricId::ALL.iter().map(|m| m.as_str().to_string()));
    w.write_record(h)?;
    for r in records {
        let mut row = vec![r.dataset_name.clone()];
        row.extend(r.features.iter().map(f64::to_string));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
