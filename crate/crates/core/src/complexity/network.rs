//! Graph measures on the same-class epsilon-neighbourhood graph: Density,
//! ClsCoef, Hubs.

use super::Prepared;

const EPSILON: f64 = 0.15;

/// Adjacency lists of the graph with an edge between same-class points
/// whose distance, divided by sqrt(d), is below [`EPSILON`].
fn graph(p: &Prepared) -> Vec<Vec<usize>> {
    let scale = (p.d() as f64).sqrt();
    let n = p.n();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if p.y[i] == p.y[j] && p.dist[[i, j]] / scale < EPSILON {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    adj
}

pub(super) fn compute(p: &Prepared) -> [f64; 3] {
    let adj = graph(p);
    [density(&adj), clustering(&adj), hubs(&adj)]
}

pub(super) fn density(adj: &[Vec<usize>]) -> f64 {
    let n = adj.len() as f64;
    let edges = adj.iter().map(Vec::len).sum::<usize>() as f64 / 2.0;
    1.0 - 2.0 * edges / (n * (n - 1.0))
}

/// One minus the mean local clustering coefficient; vertices of degree
/// below two count as zero.
pub(super) fn clustering(adj: &[Vec<usize>]) -> f64 {
    let n = adj.len();
    let mut member = vec![false; n];
    let mut total = 0.0;
    for nb in adj {
        let k = nb.len();
        if k < 2 {
            continue;
        }
        for &v in nb {
            member[v] = true;
        }
        let mut links = 0usize;
        for &a in nb {
            links += adj[a].iter().filter(|&&b| member[b]).count();
        }
        for &v in nb {
            member[v] = false;
        }
        total += (links / 2) as f64 / (k * (k - 1) / 2) as f64;
    }
    1.0 - total / n as f64
}

/// One minus the mean hub score. Hub scores are the principal eigenvector
/// of `A A^T`, found by power iteration and scaled to a maximum of one.
pub(super) fn hubs(adj: &[Vec<usize>]) -> f64 {
    let n = adj.len();
    let apply = |v: &[f64]| -> Vec<f64> { adj.iter().map(|nb| nb.iter().map(|&j| v[j]).sum()).collect() };
    let mut v = vec![1.0; n];
    for _ in 0..10_000 {
        let mut next = apply(&apply(&v));
        let max = next.iter().copied().fold(0.0, f64::max);
        if max <= 0.0 {
            return 1.0;
        }
        next.iter_mut().for_each(|x| *x /= max);
        let change = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        v = next;
        if change < 1e-12 {
            break;
        }
    }
    1.0 - v.iter().sum::<f64>() / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from_edges(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    #[test]
    fn complete_graph_has_zero_density() {
        let edges: Vec<_> = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).collect();
        let adj = from_edges(5, &edges);
        assert_eq!(density(&adj), 0.0);
        assert_eq!(clustering(&adj), 0.0);
        assert!(hubs(&adj).abs() < 1e-12);
    }

    #[test]
    fn empty_graph() {
        let adj = from_edges(4, &[]);
        assert_eq!(density(&adj), 1.0);
        assert_eq!(clustering(&adj), 1.0);
        assert_eq!(hubs(&adj), 1.0);
    }

    #[test]
    fn two_triangles() {
        let adj = from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]);
        assert!(clustering(&adj).abs() < 1e-12);
    }
}
