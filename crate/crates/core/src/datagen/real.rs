use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::seed;
use crate::{Error, Result};

/// Expected layout of a CSV file: a header row, `n_features` numeric
/// columns, then one label column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub n_features: usize,
    /// Name the label column must carry, when known.
    #[serde(default)]
    pub label: Option<String>,
}

/// How raw class values become the binary labels {0, 1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Binarization {
    /// Keep rows whose label is one of the two values; the first maps to 0.
    ClassPair { negative: String, positive: String },
    /// Numeric labels `>= threshold` map to 1, the rest to 0.
    Threshold { threshold: f64 },
}

/// A parsed CSV file before binarization.
#[derive(Debug, Clone)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub features: Array2<f64>,
    pub labels: Vec<String>,
}

fn parse_error(path: &Path, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Reads a CSV file with a header, numeric feature columns and a trailing
/// label column. With `schema`, the column count (and label name) must match.
pub fn load_csv(path: &Path, schema: Option<&CsvSchema>) -> Result<CsvTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => parse_error(path, format!("{other:?}")),
        })?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| parse_error(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.len() < 2 {
        return Err(parse_error(path, "need at least one feature column and a label column"));
    }
    if let Some(schema) = schema {
        if header.len() != schema.n_features + 1 {
            return Err(parse_error(
                path,
                format!(
                    "schema expects {} feature columns plus a label, header has {} columns",
                    schema.n_features,
                    header.len()
                ),
            ));
        }
        if let Some(label) = &schema.label {
            if header.last() != Some(label) {
                return Err(parse_error(path, format!("missing label column `{label}`")));
            }
        }
    }
    let n_features = header.len() - 1;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_error(path, e.to_string()))?;
        if record.len() != header.len() {
            return Err(parse_error(
                path,
                format!("row {} has {} fields, expected {}", row_idx + 2, record.len(), header.len()),
            ));
        }
        for field in record.iter().take(n_features) {
            let v: f64 = field.parse().map_err(|_| {
                parse_error(path, format!("row {}: `{field}` is not a number", row_idx + 2))
            })?;
            if !v.is_finite() {
                return Err(parse_error(path, format!("row {}: non-finite value", row_idx + 2)));
            }
            values.push(v);
        }
        let label = record[n_features].to_string();
        if label.is_empty() {
            return Err(parse_error(path, format!("row {}: empty label", row_idx + 2)));
        }
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(parse_error(path, "no data rows"));
    }
    let features = Array2::from_shape_vec((labels.len(), n_features), values)
        .map_err(|e| parse_error(path, e.to_string()))?;
    Ok(CsvTable {
        header,
        features,
        labels,
    })
}

impl CsvTable {
    /// Applies `rule`, dropping rows the rule does not cover.
    pub fn binarize(&self, rule: &Binarization) -> Result<(Array2<f64>, Vec<u8>)> {
        let mut keep = Vec::new();
        let mut labels = Vec::new();
        for (i, raw) in self.labels.iter().enumerate() {
            let mapped = match rule {
                Binarization::ClassPair { negative, positive } => {
                    if raw == negative {
                        Some(0)
                    } else if raw == positive {
                        Some(1)
                    } else {
                        None
                    }
                }
                Binarization::Threshold { threshold } => {
                    let v: f64 = raw.parse().map_err(|_| {
                        Error::Binarization(format!("label `{raw}` is not numeric"))
                    })?;
                    Some(u8::from(v >= *threshold))
                }
            };
            if let Some(l) = mapped {
                keep.push(i);
                labels.push(l);
            }
        }
        let ones = labels.iter().filter(|&&l| l == 1).count();
        let zeros = labels.len() - ones;
        if zeros < 2 || ones < 2 {
            return Err(Error::Binarization(format!(
                "classes collapse after binarization ({zeros}/{ones} samples)"
            )));
        }
        let features = self.features.select(ndarray::Axis(0), &keep);
        Ok((features, labels))
    }

    /// Binarizes a table whose label column holds exactly two distinct
    /// values; the lexicographically smaller value becomes class 0.
    pub fn binarize_two_valued(&self) -> Result<(Array2<f64>, Vec<u8>)> {
        let mut distinct: Vec<&String> = self.labels.iter().collect();
        distinct.sort();
        distinct.dedup();
        if distinct.len() != 2 {
            return Err(Error::Binarization(format!(
                "expected exactly 2 label values, found {}",
                distinct.len()
            )));
        }
        self.binarize(&Binarization::ClassPair {
            negative: distinct[0].clone(),
            positive: distinct[1].clone(),
        })
    }
}

/// Stratified subsample of `n` row indices (sorted ascending).
pub(crate) fn stratified_subsample(labels: &[u8], n: usize, seed: u64) -> Result<Vec<usize>> {
    let total = labels.len();
    if n > total {
        return Err(Error::InvalidArgument(format!(
            "requested {n} samples but only {total} rows are available"
        )));
    }
    let by_class: [Vec<usize>; 2] = [0u8, 1u8].map(|c| {
        labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == c)
            .map(|(i, _)| i)
            .collect()
    });
    let quotas = largest_remainder(
        &[by_class[0].len() as f64, by_class[1].len() as f64],
        n as f64 / total as f64,
        n,
    );
    let mut rng = seed::rng(seed);
    let mut chosen = Vec::with_capacity(n);
    for (class, members) in by_class.iter().enumerate() {
        let mut members = members.clone();
        members.shuffle(&mut rng);
        chosen.extend_from_slice(&members[..quotas[class].min(members.len())]);
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// Splits `total` units across groups proportional to `sizes * fraction`,
/// flooring first and then handing out leftovers by largest remainder
/// (ties to the lower group index).
pub(crate) fn largest_remainder(sizes: &[f64], fraction: f64, total: usize) -> Vec<usize> {
    let exact: Vec<f64> = sizes.iter().map(|s| s * fraction).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut assigned: usize = quotas.iter().sum();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut k = 0;
    while assigned < total && !order.is_empty() {
        let g = order[k % order.len()];
        if (quotas[g] as f64) < sizes[g] {
            quotas[g] += 1;
            assigned += 1;
        }
        k += 1;
        if k > 4 * sizes.len() + total {
            break;
        }
    }
    quotas
}

/// Loads a real-world CSV, binarizes it, and draws a stratified subsample of
/// `n_samples` rows.
pub fn load_real(
    path: &Path,
    schema: &CsvSchema,
    binarization: &Binarization,
    n_samples: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    let table = load_csv(path, Some(schema))?;
    let (features, labels) = table.binarize(binarization)?;
    let idx = stratified_subsample(&labels, n_samples, seed)?;
    let features = features.select(ndarray::Axis(0), &idx);
    let labels: Vec<u8> = idx.iter().map(|&i| labels[i]).collect();
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    let mut provenance = BTreeMap::new();
    provenance.insert("source".into(), path.display().to_string());
    provenance.insert("n_samples".into(), n_samples.to_string());
    match binarization {
        Binarization::ClassPair { negative, positive } => {
            provenance.insert("negative".into(), negative.clone());
            provenance.insert("positive".into(), positive.clone());
        }
        Binarization::Threshold { threshold } => {
            provenance.insert("threshold".into(), threshold.to_string());
        }
    }
    LabeledDataset::new(format!("{stem}_n{n_samples}_s{seed}"), features, labels, provenance, seed)
}
