use std::collections::BTreeMap;

use nalgebra::DMatrix;
use ndarray::Array2;
use proptest::prelude::*;
use qkrec::complexity::{
    canonical_text, class_balance, compression_ratio, dimensionality, extract, feature_based,
    intrinsic_dimension, kolmogorov, linearity, neighborhood, network, FeatureMode, MetricId,
};
use qkrec::datagen::{generate_synthetic, Family, LabeledDataset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn dataset(x: Array2<f64>, y: Vec<u8>) -> LabeledDataset {
    LabeledDataset::new("t", x, y, BTreeMap::new(), 0).unwrap()
}

fn gaussian_blobs(n: usize, std: f64, sep: f64, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Array2::zeros((n, 2));
    let y: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    for i in 0..n {
        let shift = if y[i] == 1 { sep } else { 0.0 };
        for j in 0..2 {
            let z: f64 = StandardNormal.sample(&mut rng);
            x[[i, j]] = z * std + shift;
        }
    }
    dataset(x, y)
}

fn scaled(d: &LabeledDataset) -> Array2<f64> {
    qkrec::datagen::fit_minmax(d.features.view()).transform(d.features.view())
}

/// Leave-one-out 1-NN error by direct enumeration; ties go to the lowest
/// index.
fn loo_1nn_oracle(x: &Array2<f64>, y: &[u8]) -> f64 {
    let n = y.len();
    let mut wrong = 0;
    for i in 0..n {
        let mut best = (usize::MAX, f64::INFINITY);
        for j in 0..n {
            if i == j {
                continue;
            }
            let d: f64 = (0..x.ncols()).map(|k| (x[[i, k]] - x[[j, k]]).powi(2)).sum();
            if d < best.1 {
                best = (j, d);
            }
        }
        if y[best.0] != y[i] {
            wrong += 1;
        }
    }
    wrong as f64 / n as f64
}

#[test]
fn separated_blobs_have_small_f1() {
    let d = gaussian_blobs(100, 0.3, 5.0, 1);
    let f = feature_based(&d).unwrap();
    // oracle: direct Fisher ratio per feature
    let x = scaled(&d);
    let mut best: f64 = 0.0;
    for j in 0..2 {
        let col = x.column(j);
        let m = col.mean().unwrap();
        let (mut b, mut w) = (0.0, 0.0);
        for c in 0..2u8 {
            let v: Vec<f64> = (0..100).filter(|&i| d.labels[i] == c).map(|i| col[i]).collect();
            let mc = v.iter().sum::<f64>() / v.len() as f64;
            b += v.len() as f64 * (mc - m).powi(2);
            w += v.iter().map(|a| (a - mc).powi(2)).sum::<f64>();
        }
        best = best.max(b / w);
    }
    assert!((f[0] - 1.0 / (1.0 + best)).abs() < 1e-12);
    assert!(f[0] < 0.2);
}

#[test]
fn separable_blobs_are_linear() {
    let d = gaussian_blobs(100, 0.3, 5.0, 2);
    assert_eq!(linearity(&d).unwrap(), vec![0.0, 0.0, 0.0]);
}

#[test]
fn xor_defeats_linear_separator() {
    let cfg = BTreeMap::from([("noise".to_string(), 0.0)]);
    let d = generate_synthetic(Family::Xor, &cfg, 100, 1).unwrap();
    assert!(linearity(&d).unwrap()[1] >= 0.25);
}

#[test]
fn n3_matches_bruteforce_on_blobs() {
    let cfg = BTreeMap::from([("centers".to_string(), 2.0), ("std".to_string(), 0.5)]);
    let d = generate_synthetic(Family::Blobs, &cfg, 150, 7).unwrap();
    let oracle = loo_1nn_oracle(&scaled(&d), &d.labels);
    assert_eq!(neighborhood(&d).unwrap()[2], oracle);
    assert!(loo_1nn_oracle(&d.features, &d.labels) < 0.1);
}

#[test]
fn identical_classes_give_full_n3() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let base = Array2::from_shape_fn((30, 3), |_| rng.random::<f64>());
    let mut x = Array2::zeros((60, 3));
    let mut y = Vec::new();
    for i in 0..30 {
        x.row_mut(2 * i).assign(&base.row(i));
        x.row_mut(2 * i + 1).assign(&base.row(i));
        y.extend([0, 1]);
    }
    let d = dataset(x, y);
    let n3 = neighborhood(&d).unwrap()[2];
    let oracle = loo_1nn_oracle(&scaled(&d), &d.labels);
    assert_eq!(oracle, 1.0);
    assert!(n3 > 0.95);
    assert_eq!(feature_based(&d).unwrap()[3], 1.0);
}

#[test]
fn lsc_is_bounded() {
    for seed in 0..5 {
        let d = gaussian_blobs(40, 1.0, 1.0, seed);
        let lsc = neighborhood(&d).unwrap()[5];
        assert!((0.0..=1.0 - 1.0 / 40.0 + 1e-12).contains(&lsc));
    }
}

#[test]
fn network_extremes() {
    // two classes, each a tight cluster of mutually close points
    let mut x = Array2::zeros((8, 2));
    let mut y = Vec::new();
    for i in 0..4 {
        x[[i, 0]] = 0.001 * i as f64;
        x[[i + 4, 0]] = 1.0 - 0.001 * i as f64;
        x[[i + 4, 1]] = 1.0;
        y.push(0);
    }
    y.extend([1, 1, 1, 1]);
    let v = network(&dataset(x, y.clone())).unwrap();
    // 12 of 28 possible edges
    assert!((v[0] - (1.0 - 12.0 / 28.0)).abs() < 1e-12);
    assert!(v[1].abs() < 1e-12);

    // spread-out points: no edges at all
    let x = Array2::from_shape_fn((6, 1), |(i, _)| i as f64);
    let v = network(&dataset(x, vec![0, 1, 0, 1, 0, 1])).unwrap();
    assert_eq!(v[0], 1.0);
    assert_eq!(v[1], 1.0);
}

#[test]
fn two_triangles_cluster_fully() {
    // two same-class triangles far apart, other points isolated
    let pts = [
        (0.0, 0.0, 0),
        (0.01, 0.0, 0),
        (0.0, 0.01, 0),
        (1.0, 1.0, 0),
        (0.99, 1.0, 0),
        (1.0, 0.99, 0),
        (0.5, 0.0, 1),
        (0.0, 0.5, 1),
        (0.5, 1.0, 1),
        (1.0, 0.5, 1),
    ];
    let x = Array2::from_shape_fn((10, 2), |(i, j)| if j == 0 { pts[i].0 } else { pts[i].1 });
    let y = pts.iter().map(|p| p.2).collect();
    let v = network(&dataset(x, y)).unwrap();
    // six vertices at coefficient 1, four isolated at 0
    assert!((v[1] - (1.0 - 6.0 / 10.0)).abs() < 1e-12);
}

#[test]
fn dimensionality_ratios() {
    let d = gaussian_blobs(100, 1.0, 0.5, 4);
    assert_eq!(dimensionality(&d).unwrap()[0], 0.02);

    let line = Array2::from_shape_fn((20, 2), |(i, j)| if j == 0 { i as f64 } else { 2.0 * i as f64 });
    let y: Vec<u8> = (0..20).map(|i| (i % 2) as u8).collect();
    let d = dataset(line, y.clone());
    assert_eq!(dimensionality(&d).unwrap()[2], 0.5);
    assert_eq!(intrinsic_dimension(&d).unwrap(), 1.0);
}

#[test]
fn duplicated_column_is_dropped_by_pca() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut x = Array2::zeros((50, 3));
    for i in 0..50 {
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        x[[i, 0]] = a;
        x[[i, 1]] = b;
        x[[i, 2]] = a;
    }
    let y: Vec<u8> = (0..50).map(|i| (i % 2) as u8).collect();
    let d = dataset(x.clone(), y);
    let t = dimensionality(&d).unwrap();
    // oracle: eigenvalues of the scaled covariance
    let s = scaled(&d);
    let n = s.nrows() as f64;
    let c = DMatrix::from_fn(3, 3, |i, j| {
        let (mi, mj) = (s.column(i).mean().unwrap(), s.column(j).mean().unwrap());
        (0..s.nrows()).map(|r| (s[[r, i]] - mi) * (s[[r, j]] - mj)).sum::<f64>() / (n - 1.0)
    });
    let mut ev: Vec<f64> = c.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = ev.iter().sum();
    assert!(ev[2].abs() < 1e-12);
    let mut k = 0;
    let mut acc = 0.0;
    while acc < 0.95 * total {
        acc += ev[k];
        k += 1;
    }
    assert!(k <= 2);
    assert_eq!(t[2], k as f64 / 3.0);
}

#[test]
fn isotropic_gaussian_has_two_dimensions() {
    let d = gaussian_blobs(1000, 1.0, 0.0, 6);
    let id = intrinsic_dimension(&d).unwrap();
    assert!((id - 2.0).abs() < 0.2, "{id}");
    let same = Array2::from_elem((6, 2), 0.5);
    assert_eq!(intrinsic_dimension(&dataset(same, vec![0, 1, 0, 1, 0, 1])).unwrap(), 1.0);
}

#[test]
fn class_balance_values() {
    let x = Array2::from_shape_fn((100, 1), |(i, _)| i as f64);
    let y: Vec<u8> = (0..100).map(|i| u8::from(i < 10)).collect();
    let v = class_balance(&dataset(x, y)).unwrap();
    let h = -(0.9f64 * 0.9f64.ln() + 0.1 * 0.1f64.ln());
    assert!((v[0] - (1.0 - h / 2f64.ln())).abs() < 1e-12);
}

#[test]
fn kolmogorov_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let digits: String = (0..20_000).map(|_| char::from(b'0' + rng.random_range(0..10u8))).collect();
    assert!(compression_ratio(digits.as_bytes()) > 0.4);
    let zeros = Array2::<f64>::zeros((200, 4));
    assert!(compression_ratio(canonical_text(zeros.view(), &[0; 200]).as_bytes()) < 0.05);
    let d = gaussian_blobs(60, 1.0, 2.0, 9);
    assert_eq!(kolmogorov(&d).unwrap(), kolmogorov(&d.clone()).unwrap());
}

#[test]
fn extract_modes() {
    let d = gaussian_blobs(80, 1.0, 2.0, 10);
    let all = extract(&d, FeatureMode::AllIn).unwrap();
    assert_eq!(all.len(), 24);
    assert_eq!(all, extract(&d, FeatureMode::AllIn).unwrap());
    let one = extract(&d, FeatureMode::SingleIn(MetricId::N4)).unwrap();
    assert_eq!(one.len(), 1);
    assert_eq!(one.values[0], all.get(MetricId::N4).unwrap());
}

#[test]
fn single_class_is_rejected() {
    let d = LabeledDataset {
        name: "s".into(),
        features: Array2::zeros((5, 2)),
        labels: vec![0; 5],
        generator_config: BTreeMap::new(),
        seed: 0,
    };
    assert!(matches!(feature_based(&d), Err(qkrec::Error::SingleClass)));
}

fn random_dataset(seed: u64, n: usize, dim: usize) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: f64 = rng.random_range(0.0..3.0);
    let x = Array2::from_shape_fn((n, dim), |_| rng.random::<f64>());
    let mut y: Vec<u8> = (0..n).map(|i| (i % 2) as u8).collect();
    if rng.random_bool(0.5) {
        y[0] = 1;
    }
    let mut x = x;
    for i in 0..n {
        if y[i] == 1 {
            x[[i, 0]] += shift * rng.random::<f64>();
        }
    }
    dataset(x, y)
}

fn check_bounds(v: &[f64], n: usize, d: usize) {
    for (m, &x) in MetricId::ALL.iter().zip(v) {
        assert!(x.is_finite(), "{m}");
        if m.is_unit_bounded() {
            assert!((-1e-12..=1.0 + 1e-12).contains(&x), "{m} = {x}");
        }
    }
    let id = v[MetricId::IntDim.index()];
    assert!(id >= 1.0 && id <= d as f64 + 1e-9);
    let k = v[MetricId::Kolmogorov.index()];
    assert!(k > 0.0 && k <= 1.1);
    assert!(v[MetricId::T2.index()] == d as f64 / n as f64);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bounded_metrics_stay_bounded(seed in any::<u64>(), n in 8usize..40, dim in 1usize..6) {
        let d = random_dataset(seed, n, dim);
        let v = extract(&d, FeatureMode::AllIn).unwrap();
        check_bounds(&v.values, n, dim);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permutation_and_label_swap_invariance(seed in any::<u64>(), n in 8usize..40, dim in 1usize..5) {
        let d = random_dataset(seed, n, dim);
        let base = extract(&d, FeatureMode::AllIn).unwrap().values;

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let shuffled = dataset(
            d.features.select(ndarray::Axis(0), &order),
            order.iter().map(|&i| d.labels[i]).collect(),
        );
        let v = extract(&shuffled, FeatureMode::AllIn).unwrap().values;
        for (a, b) in base.iter().zip(&v) {
            prop_assert!((a - b).abs() <= 1e-12);
        }

        let swapped = dataset(d.features.clone(), d.labels.iter().map(|&l| 1 - l).collect());
        let v = extract(&swapped, FeatureMode::AllIn).unwrap().values;
        for (a, b) in base.iter().zip(&v) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }
}
