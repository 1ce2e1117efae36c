//! Feature overlap measures: F1, F1v, F2, F3, F4.

use nalgebra::{DMatrix, DVector};

use super::Prepared;

pub(super) fn compute(p: &Prepared) -> [f64; 5] {
    [f1(p), f1v(p), f2(p), f3(p), f4(p)]
}

fn class_rows(p: &Prepared, c: u8) -> Vec<usize> {
    (0..p.n()).filter(|&i| p.y[i] == c).collect()
}

/// Largest per-feature Fisher discriminant ratio, mapped to 1 / (1 + r).
fn f1(p: &Prepared) -> f64 {
    let classes = [class_rows(p, 0), class_rows(p, 1)];
    let mut best: f64 = 0.0;
    for j in 0..p.d() {
        let col = p.x.column(j);
        let mean = col.sum() / p.n() as f64;
        let (mut between, mut within) = (0.0, 0.0);
        for rows in &classes {
            let mc = rows.iter().map(|&i| col[i]).sum::<f64>() / rows.len() as f64;
            between += rows.len() as f64 * (mc - mean).powi(2);
            within += rows.iter().map(|&i| (col[i] - mc).powi(2)).sum::<f64>();
        }
        let r = if within > 0.0 {
            between / within
        } else if between > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        best = best.max(r);
    }
    1.0 / (1.0 + best)
}

/// Fisher ratio along the directional vector `W^+ (mu0 - mu1)`.
fn f1v(p: &Prepared) -> f64 {
    let d = p.d();
    let n = p.n() as f64;
    let mut means = Vec::new();
    let mut w = DMatrix::<f64>::zeros(d, d);
    for c in 0..2u8 {
        let rows = class_rows(p, c);
        let nc = rows.len() as f64;
        let mu = DVector::from_fn(d, |j, _| rows.iter().map(|&i| p.x[[i, j]]).sum::<f64>() / nc);
        let mut cov = DMatrix::<f64>::zeros(d, d);
        for &i in &rows {
            let v = DVector::from_fn(d, |j, _| p.x[[i, j]]) - &mu;
            cov += &v * v.transpose();
        }
        if rows.len() > 1 {
            cov /= nc - 1.0;
        }
        w += cov * (nc / n);
        means.push(mu);
    }
    let delta = &means[0] - &means[1];
    let dir = match w.clone().pseudo_inverse(1e-12) {
        Ok(pinv) => pinv * &delta,
        Err(_) => return 1.0,
    };
    let num = dir.dot(&delta).powi(2);
    let den = (dir.transpose() * &w * &dir)[(0, 0)];
    let ratio = if den > 1e-15 {
        num / den
    } else if delta.norm() > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    1.0 / (1.0 + ratio)
}

struct Bounds {
    min: [f64; 2],
    max: [f64; 2],
}

fn bounds(p: &Prepared, j: usize, rows: &[usize]) -> Option<Bounds> {
    let mut b = Bounds {
        min: [f64::INFINITY; 2],
        max: [f64::NEG_INFINITY; 2],
    };
    for &i in rows {
        let c = usize::from(p.y[i]);
        b.min[c] = b.min[c].min(p.x[[i, j]]);
        b.max[c] = b.max[c].max(p.x[[i, j]]);
    }
    b.min.iter().all(|v| v.is_finite()).then_some(b)
}

/// The closed interval where both classes have values, if any.
fn overlap_interval(b: &Bounds) -> Option<(f64, f64)> {
    let lo = b.min[0].max(b.min[1]);
    let hi = b.max[0].min(b.max[1]);
    (lo <= hi).then_some((lo, hi))
}

/// Volume of the overlap region relative to the joint bounding box.
fn f2(p: &Prepared) -> f64 {
    let rows: Vec<usize> = (0..p.n()).collect();
    let mut product = 1.0;
    for j in 0..p.d() {
        let b = bounds(p, j, &rows).expect("both classes present");
        let range = b.max[0].max(b.max[1]) - b.min[0].min(b.min[1]);
        let ratio = match overlap_interval(&b) {
            Some(_) if range <= 0.0 => 1.0,
            Some((lo, hi)) => (hi - lo) / range,
            None => 0.0,
        };
        product *= ratio;
    }
    product
}

fn count_in_overlap(p: &Prepared, j: usize, rows: &[usize]) -> Vec<usize> {
    match bounds(p, j, rows).as_ref().and_then(overlap_interval) {
        Some((lo, hi)) => rows
            .iter()
            .copied()
            .filter(|&i| (lo..=hi).contains(&p.x[[i, j]]))
            .collect(),
        None => Vec::new(),
    }
}

/// Smallest fraction of points left in the overlap by any single feature.
fn f3(p: &Prepared) -> f64 {
    let rows: Vec<usize> = (0..p.n()).collect();
    (0..p.d())
        .map(|j| count_in_overlap(p, j, &rows).len())
        .min()
        .unwrap_or(p.n()) as f64
        / p.n() as f64
}

/// Fraction of points left after greedily removing, feature by feature,
/// every point outside the current overlap region.
fn f4(p: &Prepared) -> f64 {
    let mut rows: Vec<usize> = (0..p.n()).collect();
    let mut features: Vec<usize> = (0..p.d()).collect();
    while !features.is_empty() && !rows.is_empty() {
        let (pos, kept) = features
            .iter()
            .enumerate()
            .map(|(pos, &j)| (pos, count_in_overlap(p, j, &rows)))
            .min_by_key(|(_, kept)| kept.len())
            .expect("features is non-empty");
        rows = kept;
        features.remove(pos);
    }
    rows.len() as f64 / p.n() as f64
}
