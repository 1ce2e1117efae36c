use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use qkrec::datagen::{
    encode_angles, generate_synthetic, load_real, preprocess, Binarization, CsvSchema, DatasetManifest, Family,
    SyntheticConfig,
};

fn manifest() -> DatasetManifest {
    DatasetManifest::from_path(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/manifest.toml")).unwrap()
}

#[test]
fn shipped_manifest_has_two_hundred_datasets() {
    let entries = manifest().entries().unwrap();
    assert_eq!(entries.len(), 200);
    let mut groups: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &entries {
        *groups.entry(if e.synthetic { e.group.as_str() } else { "real" }).or_default() += 1;
    }
    let expected = [
        ("blobs", 42),
        ("checkerboard", 27),
        ("circles", 24),
        ("moons", 21),
        ("real", 26),
        ("rings", 24),
        ("spiral", 18),
        ("xor", 18),
    ];
    assert_eq!(groups.into_iter().collect::<Vec<_>>(), expected);
    assert_eq!(manifest().holdout_entries().unwrap().len(), 7);
}

#[test]
fn every_holdout_materializes() {
    for h in manifest().holdout_entries().unwrap() {
        let d = h.materialize().unwrap();
        assert_eq!(d.n_samples(), 120, "{}", h.name);
        assert!(d.class_counts().iter().all(|&c| c >= 2), "{}", h.name);
    }
}

fn loo_1nn_error(x: &Array2<f64>, y: &[u8]) -> f64 {
    let n = y.len();
    let mut errors = 0;
    for i in 0..n {
        let mut best = (f64::INFINITY, 0);
        for j in (0..n).filter(|&j| j != i) {
            let d: f64 = x.row(i).iter().zip(x.row(j)).map(|(a, b)| (a - b).powi(2)).sum();
            if d < best.0 {
                best = (d, j);
            }
        }
        errors += usize::from(y[best.1] != y[i]);
    }
    errors as f64 / n as f64
}

#[test]
fn separated_blobs_are_nearly_one_nn_separable() {
    let cfg: SyntheticConfig = [("centers".to_string(), 2.0), ("std".to_string(), 0.5)].into();
    let d = generate_synthetic(Family::Blobs, &cfg, 200, 7).unwrap();
    assert!(loo_1nn_error(&d.features, &d.labels) < 0.1);
}

#[test]
fn wine_projection_spans_leading_eigenvectors() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/real/wine.csv");
    let schema = CsvSchema {
        n_features: 13,
        label: Some("cultivar".into()),
    };
    let rule = Binarization::ClassPair {
        negative: "0".into(),
        positive: "1".into(),
    };
    let d = load_real(&path, &schema, &rule, 120, 0).unwrap();
    let (angles, scaler, pca) = encode_angles(&d);
    assert_eq!(angles.ncols(), 4);
    let pca = pca.expect("13 features need projecting");
    // oracle: eigenvectors of the covariance of the min-max scaled data
    let xs = scaler.transform(d.features.view());
    let n = xs.nrows() as f64;
    let mean = xs.mean_axis(ndarray::Axis(0)).unwrap();
    let c = xs - &mean;
    let cov = c.t().dot(&c) / (n - 1.0);
    let m = nalgebra::DMatrix::from_fn(13, 13, |i, j| cov[[i, j]]);
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..13).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top: Vec<Vec<f64>> = order[..4].iter().map(|&k| eig.eigenvectors.column(k).iter().copied().collect()).collect();
    for (k, v) in top.iter().enumerate() {
        let dot: f64 = v.iter().zip(pca.components.column(k)).map(|(a, b)| a * b).sum();
        assert!((dot.abs() - 1.0).abs() < 1e-8, "component {k}: |dot| = {}", dot.abs());
    }
    assert!(angles.iter().all(|&a| (0.0..=std::f64::consts::PI).contains(&a)));
}

#[test]
fn preprocessing_split_is_stratified() {
    let spec = &manifest().entries().unwrap()[0];
    let d = spec.materialize().unwrap();
    let p = preprocess(&d, 3).unwrap();
    let frac = |y: &[u8]| y.iter().filter(|&&l| l == 1).count() as f64 / y.len() as f64;
    assert!((frac(&p.train_labels) - frac(&p.test_labels)).abs() < 0.05);
    assert_eq!(p.train_features.ncols(), 4);
    assert_eq!(p.train_indices.len() + p.test_indices.len(), d.n_samples());
}
