use std::f64::consts::PI;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::real::largest_remainder;
use super::LabeledDataset;
use crate::linalg;
use crate::seed;
use crate::{Error, Result};

/// Width of every encoded sample; one feature per qubit.
pub const N_QUBITS: usize = 4;

const TEST_FRACTION: f64 = 0.2;

/// Per-column min/max of the data a scaler was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalerParams {
    /// Maps each column to [0, 1]; a constant column maps to 0.
    pub fn transform(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (lo, hi) = (self.min[j], self.max[j]);
            let span = hi - lo;
            col.mapv_inplace(|v| if span > 0.0 { ((v - lo) / span).clamp(0.0, 1.0) } else { 0.0 });
        }
        out
    }
}

pub fn fit_minmax(x: ArrayView2<f64>) -> ScalerParams {
    let (min, max) = x
        .axis_iter(Axis(1))
        .map(|col| {
            col.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
        })
        .unzip();
    ScalerParams { min, max }
}

/// Copy of `d` with every column min-max scaled to [0, 1].
pub fn minmax_scale(d: &LabeledDataset) -> LabeledDataset {
    let params = fit_minmax(d.features.view());
    LabeledDataset {
        features: params.transform(d.features.view()),
        ..d.clone()
    }
}

/// Projection onto the leading principal components, followed by a second
/// min-max scaling of the projected coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaParams {
    pub mean: Vec<f64>,
    /// Columns are unit-norm principal directions, largest variance first.
    pub components: Array2<f64>,
    pub explained_variance: Vec<f64>,
    pub post_scaler: ScalerParams,
}

impl PcaParams {
    pub fn fit(x: ArrayView2<f64>, k: usize) -> Self {
        let mean = x.mean_axis(Axis(0)).expect("non-empty data");
        let cov = linalg::covariance(x);
        let (values, vectors) = linalg::symmetric_eigen(cov.view());
        let mut components = vectors.slice(ndarray::s![.., ..k]).to_owned();
        // Sign convention: the largest-magnitude coordinate of each
        // component is positive.
        for mut col in components.axis_iter_mut(Axis(1)) {
            let mut best = 0;
            for (i, v) in col.iter().enumerate() {
                if v.abs() > col[best].abs() {
                    best = i;
                }
            }
            if col[best] < 0.0 {
                col.mapv_inplace(|v| -v);
            }
        }
        let projected = (&x - &mean).dot(&components);
        PcaParams {
            mean: mean.to_vec(),
            components,
            explained_variance: values[..k].to_vec(),
            post_scaler: fit_minmax(projected.view()),
        }
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mean = Array1::from_vec(self.mean.clone());
        let projected = (&x - &mean).dot(&self.components);
        self.post_scaler.transform(projected.view())
    }
}

/// Maps a dataset to rotation angles in [0, pi] with exactly [`N_QUBITS`]
/// columns. Wider data is projected with PCA; narrower data has its columns
/// repeated cyclically so that every qubit carries a feature.
pub fn encode_angles(d: &LabeledDataset) -> (Array2<f64>, ScalerParams, Option<PcaParams>) {
    let scaler = fit_minmax(d.features.view());
    let scaled = scaler.transform(d.features.view());
    let (unit, pca) = if scaled.ncols() > N_QUBITS {
        let pca = PcaParams::fit(scaled.view(), N_QUBITS);
        (pca.transform(scaled.view()), Some(pca))
    } else if scaled.ncols() < N_QUBITS {
        let d_raw = scaled.ncols();
        let cols: Vec<usize> = (0..N_QUBITS).map(|q| q % d_raw).collect();
        (scaled.select(Axis(1), &cols), None)
    } else {
        (scaled, None)
    };
    let angles = unit.mapv(|v| (v * PI).clamp(0.0, PI));
    (angles, scaler, pca)
}

/// Stratified 8/2 split. Returns `(train, test)` row indices, each sorted.
pub fn stratified_split(labels: &[u8], seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = labels.len();
    if n < 5 {
        return Err(Error::Split(format!("need at least 5 samples, got {n}")));
    }
    let n_test = (TEST_FRACTION * n as f64).round() as usize;
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        by_class[usize::from(l.min(1))].push(i);
    }
    let quotas = largest_remainder(
        &[by_class[0].len() as f64, by_class[1].len() as f64],
        TEST_FRACTION,
        n_test,
    );
    for (c, members) in by_class.iter().enumerate() {
        if !members.is_empty() && quotas[c] >= members.len() {
            return Err(Error::Split(format!("class {c} would have no training samples")));
        }
    }
    let mut rng = seed::rng(seed);
    let mut train = Vec::with_capacity(n - n_test);
    let mut test = Vec::with_capacity(n_test);
    for (c, members) in by_class.iter_mut().enumerate() {
        members.shuffle(&mut rng);
        test.extend_from_slice(&members[..quotas[c]]);
        train.extend_from_slice(&members[quotas[c]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// The encoder-ready form of a dataset: angles in [0, pi]^4, split 8/2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessedDataset {
    pub name: String,
    pub train_features: Array2<f64>,
    pub test_features: Array2<f64>,
    pub train_labels: Vec<u8>,
    pub test_labels: Vec<u8>,
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub scaler_params: ScalerParams,
    pub pca_params: Option<PcaParams>,
}

/// Min-max scale, reduce to four columns, map to angles, then split.
/// PCA is fitted on the whole dataset before the split.
pub fn preprocess(d: &LabeledDataset, seed: u64) -> Result<PreprocessedDataset> {
    d.validate()?;
    let (angles, scaler_params, pca_params) = encode_angles(d);
    let (train_indices, test_indices) = stratified_split(&d.labels, seed)?;
    let pick = |idx: &[usize]| -> (Array2<f64>, Vec<u8>) {
        (angles.select(Axis(0), idx), idx.iter().map(|&i| d.labels[i]).collect())
    };
    let (train_features, train_labels) = pick(&train_indices);
    let (test_features, test_labels) = pick(&test_indices);
    Ok(PreprocessedDataset {
        name: d.name.clone(),
        train_features,
        test_features,
        train_labels,
        test_labels,
        train_indices,
        test_indices,
        scaler_params,
        pca_params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use std::collections::BTreeMap;

    fn dataset(features: Array2<f64>, labels: Vec<u8>) -> LabeledDataset {
        LabeledDataset::new("t", features, labels, BTreeMap::new(), 0).unwrap()
    }

    #[test]
    fn minmax_then_angles() {
        let x = array![[2.0, 1.0, 0.0, 5.0], [4.0, 1.0, 1.0, 5.0], [6.0, 1.0, 2.0, 5.0], [4.0, 1.0, 3.0, 5.0]];
        let d = dataset(x, vec![0, 0, 1, 1]);
        let (angles, scaler, pca) = encode_angles(&d);
        assert!(pca.is_none());
        assert_eq!(scaler.min[0], 2.0);
        assert_eq!(angles[[0, 0]], 0.0);
        assert_eq!(angles[[1, 0]], PI / 2.0);
        assert_eq!(angles[[2, 0]], PI);
        // constant columns map to 0
        assert!(angles.column(1).iter().all(|&v| v == 0.0));
        assert!(angles.column(3).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn narrow_data_repeats_columns() {
        let x = array![[0.0, 1.0], [1.0, 0.0], [0.5, 0.5], [0.2, 0.9], [0.9, 0.1]];
        let d = dataset(x, vec![0, 0, 1, 1, 1]);
        let (angles, _, _) = encode_angles(&d);
        assert_eq!(angles.ncols(), 4);
        assert_eq!(angles.column(0), angles.column(2));
        assert_eq!(angles.column(1), angles.column(3));
    }

    #[test]
    fn split_sizes_for_n100() {
        let labels: Vec<u8> = (0..100).map(|i| (i % 2) as u8).collect();
        let (train, test) = stratified_split(&labels, 3).unwrap();
        assert_eq!(train.len(), 80);
        assert_eq!(test.len(), 20);
        let test_ones = test.iter().filter(|&&i| labels[i] == 1).count();
        assert_eq!(test_ones, 10);
    }

    #[test]
    fn split_needs_five_samples() {
        assert!(matches!(stratified_split(&[0, 0, 1, 1], 0), Err(Error::Split(_))));
    }

    #[test]
    fn already_unit_data_keeps_unit_scaler() {
        let x = array![[0.0, 1.0], [1.0, 0.0], [0.3, 0.5], [0.7, 0.2]];
        let params = fit_minmax(x.view());
        assert_eq!(params.min, vec![0.0, 0.0]);
        assert_eq!(params.max, vec![1.0, 1.0]);
    }
}
