//! Neighbourhood measures: N1, N2, N3, N4, T1, LSC.

use ndarray::ArrayView1;

use super::Prepared;

pub(super) fn compute(p: &Prepared) -> [f64; 6] {
    let enemy: Vec<f64> = (0..p.n())
        .map(|i| p.nearest(i, |j| p.y[j] != p.y[i]).expect("two classes").1)
        .collect();
    [n1(p), n2(p, &enemy), n3(p), n4(p), t1(p, &enemy), lsc(p, &enemy)]
}

/// Fraction of minimum-spanning-tree edges that join opposite classes.
fn n1(p: &Prepared) -> f64 {
    let n = p.n();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    best[0] = 0.0;
    let mut crossing = 0usize;
    for _ in 0..n {
        let mut u = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (u == usize::MAX || best[v] < best[u]) {
                u = v;
            }
        }
        in_tree[u] = true;
        if parent[u] != usize::MAX && p.y[parent[u]] != p.y[u] {
            crossing += 1;
        }
        for v in 0..n {
            if !in_tree[v] && p.dist[[u, v]] < best[v] {
                best[v] = p.dist[[u, v]];
                parent[v] = u;
            }
        }
    }
    crossing as f64 / (n - 1) as f64
}

/// Intra/inter class nearest-neighbour distance ratio, as r / (1 + r).
fn n2(p: &Prepared, enemy: &[f64]) -> f64 {
    let intra: f64 = (0..p.n())
        .map(|i| p.nearest(i, |j| p.y[j] == p.y[i]).map_or(0.0, |(_, d)| d))
        .sum();
    let inter: f64 = enemy.iter().sum();
    if inter <= 0.0 {
        return 1.0;
    }
    let r = intra / inter;
    r / (1.0 + r)
}

/// Leave-one-out 1-NN error.
fn n3(p: &Prepared) -> f64 {
    let wrong = (0..p.n())
        .filter(|&i| {
            let (j, _) = p.nearest(i, |_| true).expect("at least two samples");
            p.y[j] != p.y[i]
        })
        .count();
    wrong as f64 / p.n() as f64
}

fn nearest_to(p: &Prepared, q: ArrayView1<f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (j, row) in p.x.outer_iter().enumerate() {
        let d: f64 = row.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        if d < best.1 {
            best = (j, d);
        }
    }
    best.0
}

/// 1-NN error on interpolated points, with the original data as reference.
fn n4(p: &Prepared) -> f64 {
    let (xi, yi) = p.interpolated();
    let wrong = xi
        .outer_iter()
        .zip(&yi)
        .filter(|(row, &l)| p.y[nearest_to(p, *row)] != l)
        .count();
    wrong as f64 / yi.len() as f64
}

/// Fraction of nearest-enemy hyperspheres not contained in another sphere
/// of the same class. Of two identical spheres the lower index survives.
fn t1(p: &Prepared, enemy: &[f64]) -> f64 {
    const TOL: f64 = 1e-12;
    let n = p.n();
    let kept = (0..n)
        .filter(|&i| {
            !(0..n).any(|j| {
                if j == i || p.y[j] != p.y[i] {
                    return false;
                }
                let contained = p.dist[[i, j]] + enemy[i] <= enemy[j] + TOL;
                let identical = p.dist[[i, j]] <= TOL && (enemy[i] - enemy[j]).abs() <= TOL;
                contained && (!identical || j < i)
            })
        })
        .count();
    kept as f64 / n as f64
}

/// One minus the mean local-set size over n. A local set holds the points
/// closer than the nearest enemy, the point itself included.
fn lsc(p: &Prepared, enemy: &[f64]) -> f64 {
    let n = p.n();
    let total: usize = (0..n)
        .map(|i| (0..n).filter(|&j| p.dist[[i, j]] < enemy[i]).count())
        .sum();
    1.0 - total as f64 / (n * n) as f64
}
