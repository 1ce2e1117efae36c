//! Dataset sources and the shared preprocessing pipeline.
//!
//! Everything here is a pure function of its inputs and seed: the same
//! `(family, config, n, seed)` always yields the same dataset, and the same
//! `(dataset, seed)` always yields the same split.

mod generators;
mod manifest;
mod preprocess;
mod real;

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use generators::{generate_synthetic, Family, SyntheticConfig};
pub use manifest::{DatasetManifest, DatasetSource, DatasetSpec, HoldoutEntry, RealGroup, SyntheticGroup};
pub use preprocess::{
    encode_angles,
    fit_minmax, minmax_scale, preprocess, stratified_split, PcaParams, PreprocessedDataset,
    ScalerParams, N_QUBITS,
};
pub use real::{load_csv, load_real, Binarization, CsvSchema, CsvTable};

/// A real-valued feature matrix with binary labels and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub name: String,
    pub features: Array2<f64>,
    pub labels: Vec<u8>,
    pub generator_config: BTreeMap<String, String>,
    pub seed: u64,
}

impl LabeledDataset {
    /// Builds a dataset and checks the invariants: matching row counts,
    /// finite values, binary labels, at least two samples per class.
    pub fn new(
        name: impl Into<String>,
        features: Array2<f64>,
        labels: Vec<u8>,
        generator_config: BTreeMap<String, String>,
        seed: u64,
    ) -> Result<Self> {
        let d = LabeledDataset {
            name: name.into(),
            features,
            labels,
            generator_config,
            seed,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.nrows() != self.labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{}: {} rows but {} labels",
                self.name,
                self.features.nrows(),
                self.labels.len()
            )));
        }
        if self.features.ncols() == 0 {
            return Err(Error::InvalidDataset(format!("{}: no feature columns", self.name)));
        }
        if self.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset(format!("{}: non-finite feature value", self.name)));
        }
        if let Some(bad) = self.labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidDataset(format!("{}: label {bad} is not binary", self.name)));
        }
        let [n0, n1] = self.class_counts();
        if n0 < 2 || n1 < 2 {
            return Err(Error::InvalidDataset(format!(
                "{}: need at least 2 samples per class, got {n0}/{n1}",
                self.name
            )));
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }
}
