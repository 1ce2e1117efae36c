//! The 24 classical data-complexity descriptors.
//!
//! All metrics follow the complexity-oriented convention: larger values
//! mean a harder problem. They are computed on min-max scaled features
//! before any dimensionality reduction. Inputs are first put in a
//! canonical form (rows sorted, labels renumbered by first appearance) so
//! that sample order and class naming cannot influence any value.

mod balance;
mod dimensionality;
mod feature;
mod kolmogorov;
mod linearity;
mod neighborhood;
mod network;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, Axis};
use serde::{Deserialize, Serialize};

use rand::Rng;

use crate::datagen::{fit_minmax, LabeledDataset};
use crate::seed;
use crate::{Error, Result};

pub use kolmogorov::{canonical_text, compression_ratio, DEFLATE_LEVEL};
pub use linearity::LinearSvm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MetricId {
    F1,
    F1v,
    F2,
    F3,
    F4,
    L1,
    L2,
    L3,
    N1,
    N2,
    N3,
    N4,
    T1,
    LSC,
    Density,
    ClsCoef,
    Hubs,
    T2,
    T3,
    T4,
    C1,
    C2,
    IntDim,
    Kolmogorov,
}

impl MetricId {
    pub const ALL: [MetricId; 24] = [
        MetricId::F1,
        MetricId::F1v,
        MetricId::F2,
        MetricId::F3,
        MetricId::F4,
        MetricId::L1,
        MetricId::L2,
        MetricId::L3,
        MetricId::N1,
        MetricId::N2,
        MetricId::N3,
        MetricId::N4,
        MetricId::T1,
        MetricId::LSC,
        MetricId::Density,
        MetricId::ClsCoef,
        MetricId::Hubs,
        MetricId::T2,
        MetricId::T3,
        MetricId::T4,
        MetricId::C1,
        MetricId::C2,
        MetricId::IntDim,
        MetricId::Kolmogorov,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MetricId::F1 => "F1",
            MetricId::F1v => "F1v",
            MetricId::F2 => "F2",
            MetricId::F3 => "F3",
            MetricId::F4 => "F4",
            MetricId::L1 => "L1",
            MetricId::L2 => "L2",
            MetricId::L3 => "L3",
            MetricId::N1 => "N1",
            MetricId::N2 => "N2",
            MetricId::N3 => "N3",
            MetricId::N4 => "N4",
            MetricId::T1 => "T1",
            MetricId::LSC => "LSC",
            MetricId::Density => "Density",
            MetricId::ClsCoef => "ClsCoef",
            MetricId::Hubs => "Hubs",
            MetricId::T2 => "T2",
            MetricId::T3 => "T3",
            MetricId::T4 => "T4",
            MetricId::C1 => "C1",
            MetricId::C2 => "C2",
            MetricId::IntDim => "IntDim",
            MetricId::Kolmogorov => "Kolmogorov",
        }
    }

    /// True for metrics defined on [0, 1].
    pub fn is_unit_bounded(self) -> bool {
        !matches!(
            self,
            MetricId::T2 | MetricId::T3 | MetricId::IntDim | MetricId::Kolmogorov
        )
    }

    fn group(self) -> Group {
        use MetricId::*;
        match self {
            F1 | F1v | F2 | F3 | F4 => Group::Feature,
            L1 | L2 | L3 => Group::Linearity,
            N1 | N2 | N3 | N4 | T1 | LSC => Group::Neighborhood,
            Density | ClsCoef | Hubs => Group::Network,
            T2 | T3 | T4 => Group::Dimensionality,
            C1 | C2 => Group::Balance,
            IntDim => Group::IntDim,
            Kolmogorov => Group::Kolmogorov,
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownId(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Group {
    Feature,
    Linearity,
    Neighborhood,
    Network,
    Dimensionality,
    Balance,
    IntDim,
    Kolmogorov,
}

/// Which metrics make up a feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureMode {
    AllIn,
    SingleIn(MetricId),
}

impl FeatureMode {
    /// ALL-IN followed by SINGLE-IN for each metric in canonical order.
    pub fn all() -> Vec<FeatureMode> {
        std::iter::once(FeatureMode::AllIn)
            .chain(MetricId::ALL.iter().map(|&m| FeatureMode::SingleIn(m)))
            .collect()
    }

    pub fn metrics(self) -> Vec<MetricId> {
        match self {
            FeatureMode::AllIn => MetricId::ALL.to_vec(),
            FeatureMode::SingleIn(m) => vec![m],
        }
    }

    pub fn width(self) -> usize {
        match self {
            FeatureMode::AllIn => MetricId::ALL.len(),
            FeatureMode::SingleIn(_) => 1,
        }
    }

    /// Picks this mode's columns out of a full 24-value vector.
    pub fn select(self, full: &[f64]) -> Vec<f64> {
        match self {
            FeatureMode::AllIn => full.to_vec(),
            FeatureMode::SingleIn(m) => vec![full[m.index()]],
        }
    }
}

impl fmt::Display for FeatureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureMode::AllIn => f.write_str("ALL-IN"),
            FeatureMode::SingleIn(m) => write!(f, "SINGLE-IN({m})"),
        }
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("ALL-IN") || t.eq_ignore_ascii_case("all") {
            return Ok(FeatureMode::AllIn);
        }
        let inner = t
            .strip_prefix("SINGLE-IN(")
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(t);
        inner.parse().map(FeatureMode::SingleIn)
    }
}

/// Complexity descriptors of one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityVector {
    pub dataset_name: String,
    pub metrics: Vec<MetricId>,
    pub values: Vec<f64>,
}

impl ComplexityVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, m: MetricId) -> Option<f64> {
        self.metrics.iter().position(|&k| k == m).map(|i| self.values[i])
    }

    /// The feature mode this vector was extracted under, if it is one.
    pub fn mode(&self) -> Option<FeatureMode> {
        match self.metrics.as_slice() {
            [m] => Some(FeatureMode::SingleIn(*m)),
            ms if ms == MetricId::ALL => Some(FeatureMode::AllIn),
            _ => None,
        }
    }
}

/// Canonical, min-max scaled view of a dataset shared by all metrics.
pub(crate) struct Prepared {
    pub x: Array2<f64>,
    pub y: Vec<u8>,
    pub dist: Array2<f64>,
}

impl Prepared {
    pub fn new(d: &LabeledDataset) -> Result<Self> {
        let [n0, n1] = d.class_counts();
        if n0 == 0 || n1 == 0 {
            return Err(Error::SingleClass);
        }
        d.validate()?;
        let scaled = fit_minmax(d.features.view()).transform(d.features.view());
        let mut order: Vec<usize> = (0..d.n_samples()).collect();
        order.sort_by(|&a, &b| {
            let (ra, rb) = (scaled.row(a), scaled.row(b));
            ra.iter()
                .zip(rb.iter())
                .map(|(u, v)| u.total_cmp(v))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
                .then(d.labels[a].cmp(&d.labels[b]))
        });
        let x = scaled.select(Axis(0), &order);
        let first = d.labels[order[0]];
        let y: Vec<u8> = order.iter().map(|&i| u8::from(d.labels[i] != first)).collect();
        let n = y.len();
        let mut dist = Array2::zeros((n, n));
        for i in 0..n {
            for j in i + 1..n {
                let v = x
                    .row(i)
                    .iter()
                    .zip(x.row(j).iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                dist[[i, j]] = v;
                dist[[j, i]] = v;
            }
        }
        Ok(Prepared { x, y, dist })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn class_counts(&self) -> [usize; 2] {
        let ones = self.y.iter().filter(|&&l| l == 1).count();
        [self.y.len() - ones, ones]
    }

    /// Nearest neighbour of `i` among indices accepted by `keep`; lowest
    /// index wins ties.
    pub fn nearest(&self, i: usize, keep: impl Fn(usize) -> bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n() {
            if j == i || !keep(j) {
                continue;
            }
            let dij = self.dist[[i, j]];
            if best.is_none_or(|(_, b)| dij < b) {
                best = Some((j, dij));
            }
        }
        best
    }
}

impl Prepared {
    /// One synthetic point per sample: a uniform convex combination of two
    /// random points of that sample's class. Seeded from the data itself.
    pub fn interpolated(&self) -> (Array2<f64>, Vec<u8>) {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in self.x.iter() {
            h = seed::derive(h, &[v.to_bits()]);
        }
        h = seed::derive(h, &[self.y.iter().fold(0u64, |a, &l| a.rotate_left(1) ^ u64::from(l))]);
        let mut rng = seed::rng(h);
        let members: [Vec<usize>; 2] =
            [0u8, 1].map(|c| (0..self.n()).filter(|&i| self.y[i] == c).collect());
        let mut out = Array2::zeros((self.n(), self.d()));
        for i in 0..self.n() {
            let pool = &members[usize::from(self.y[i])];
            let a = pool[rng.random_range(0..pool.len())];
            let b = pool[rng.random_range(0..pool.len())];
            let t: f64 = rng.random();
            let row = &self.x.row(a) * (1.0 - t) + &self.x.row(b) * t;
            out.row_mut(i).assign(&row);
        }
        (out, self.y.clone())
    }
}

fn group_values(p: &Prepared, g: Group) -> Vec<(MetricId, f64)> {
    use MetricId::*;
    match g {
        Group::Feature => {
            let v = feature::compute(p);
            vec![(F1, v[0]), (F1v, v[1]), (F2, v[2]), (F3, v[3]), (F4, v[4])]
        }
        Group::Linearity => {
            let v = linearity::compute(p);
            vec![(L1, v[0]), (L2, v[1]), (L3, v[2])]
        }
        Group::Neighborhood => {
            let v = neighborhood::compute(p);
            vec![(N1, v[0]), (N2, v[1]), (N3, v[2]), (N4, v[3]), (T1, v[4]), (LSC, v[5])]
        }
        Group::Network => {
            let v = network::compute(p);
            vec![(Density, v[0]), (ClsCoef, v[1]), (Hubs, v[2])]
        }
        Group::Dimensionality => {
            let v = dimensionality::sparsity(p);
            vec![(T2, v[0]), (T3, v[1]), (T4, v[2])]
        }
        Group::Balance => {
            let v = balance::compute(p.class_counts());
            vec![(C1, v[0]), (C2, v[1])]
        }
        Group::IntDim => vec![(IntDim, dimensionality::participation_ratio(p))],
        Group::Kolmogorov => vec![(Kolmogorov, kolmogorov::compute(p))],
    }
}

fn group_of(d: &LabeledDataset, g: Group) -> Result<Vec<f64>> {
    let p = Prepared::new(d)?;
    Ok(group_values(&p, g).into_iter().map(|(_, v)| v).collect())
}

/// F1, F1v, F2, F3, F4.
pub fn feature_based(d: &LabeledDataset) -> Result<Vec<f64>> {
    group_of(d, Group::Feature)
}

/// L1, L2, L3.
pub fn linearity(d: &LabeledDataset) -> Result<Vec<f64>> {
    group_of(d, Group::Linearity)
}

/// N1, N2, N3, N4, T1, LSC.
pub fn neighborhood(d: &LabeledDataset) -> Result<Vec<f64>> {
    group_of(d, Group::Neighborhood)
}

/// Density, ClsCoef, Hubs.
pub fn network(d: &LabeledDataset) -> Result<Vec<f64>> {
    group_of(d, Group::Network)
}

/// T2, T3, T4.
pub fn dimensionality(d: &LabeledDataset) -> Result<Vec<f64>> {
    group_of(d, Group::Dimensionality)
}

/// C1, C2.
pub fn class_balance(d: &LabeledDataset) -> Result<Vec<f64>> {
    group_of(d, Group::Balance)
}

pub fn intrinsic_dimension(d: &LabeledDataset) -> Result<f64> {
    Ok(group_of(d, Group::IntDim)?[0])
}

pub fn kolmogorov(d: &LabeledDataset) -> Result<f64> {
    Ok(group_of(d, Group::Kolmogorov)?[0])
}

/// Computes the metrics selected by `mode`, in canonical order.
pub fn extract(d: &LabeledDataset, mode: FeatureMode) -> Result<ComplexityVector> {
    let p = Prepared::new(d)?;
    let wanted = mode.metrics();
    let mut groups: Vec<Group> = Vec::new();
    for m in &wanted {
        if !groups.contains(&m.group()) {
            groups.push(m.group());
        }
    }
    let computed: Vec<(MetricId, f64)> = groups
        .into_iter()
        .flat_map(|g| group_values(&p, g))
        .collect();
    let values: Vec<f64> = wanted
        .iter()
        .map(|m| {
            computed
                .iter()
                .find(|(k, _)| k == m)
                .map(|&(_, v)| v)
                .expect("every group yields its metrics")
        })
        .collect();
    if let Some((m, v)) = wanted.iter().zip(&values).find(|(_, v)| !v.is_finite()) {
        return Err(Error::Numerical(format!("{m} is {v} on {}", d.name)));
    }
    Ok(ComplexityVector {
        dataset_name: d.name.clone(),
        metrics: wanted,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_are_ordered_and_unique() {
        for (i, m) in MetricId::ALL.iter().enumerate() {
            assert_eq!(m.index(), i);
            assert_eq!(m.as_str().parse::<MetricId>().unwrap(), *m);
        }
    }

    #[test]
    fn modes_parse_and_select() {
        assert_eq!("ALL-IN".parse::<FeatureMode>().unwrap(), FeatureMode::AllIn);
        assert_eq!(
            "SINGLE-IN(N4)".parse::<FeatureMode>().unwrap(),
            FeatureMode::SingleIn(MetricId::N4)
        );
        let full: Vec<f64> = (0..24).map(f64::from).collect();
        assert_eq!(FeatureMode::SingleIn(MetricId::N4).select(&full), vec![11.0]);
        assert_eq!(FeatureMode::all().len(), 25);
    }
}
