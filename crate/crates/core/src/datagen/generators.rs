use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::LabeledDataset;
use crate::seed::{self, Rng};
use crate::{Error, Result};

/// Hyperparameters of a synthetic generator, keyed by name.
pub type SyntheticConfig = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Blobs,
    Circles,
    Moons,
    Rings,
    Xor,
    Spiral,
    Checkerboard,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Blobs,
        Family::Circles,
        Family::Moons,
        Family::Rings,
        Family::Xor,
        Family::Spiral,
        Family::Checkerboard,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Blobs => "blobs",
            Family::Circles => "circles",
            Family::Moons => "moons",
            Family::Rings => "rings",
            Family::Xor => "xor",
            Family::Spiral => "spiral",
            Family::Checkerboard => "checkerboard",
        }
    }

    /// Accepted config keys and their defaults.
    fn keys(self) -> &'static [(&'static str, f64)] {
        match self {
            Family::Blobs => &[
                ("centers", 2.0),
                ("n_features", 2.0),
                ("std", 1.0),
                ("box", 10.0),
                ("weight", 0.5),
            ],
            Family::Circles => &[("noise", 0.0), ("factor", 0.8)],
            Family::Moons => &[("noise", 0.0)],
            Family::Rings => &[("rings", 3.0), ("width", 0.5), ("noise", 0.0)],
            Family::Xor => &[("noise", 0.0)],
            Family::Spiral => &[("turns", 1.0), ("noise", 0.0)],
            Family::Checkerboard => &[("k", 4.0), ("noise", 0.0)],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "blobs" => Ok(Family::Blobs),
            "circles" => Ok(Family::Circles),
            "moons" => Ok(Family::Moons),
            "rings" | "concentric_rings" | "concentricrings" => Ok(Family::Rings),
            "xor" => Ok(Family::Xor),
            "spiral" => Ok(Family::Spiral),
            "checkerboard" => Ok(Family::Checkerboard),
            _ => Err(Error::UnknownFamily(s.to_string())),
        }
    }
}

struct Params {
    family: Family,
    values: BTreeMap<&'static str, f64>,
}

impl Params {
    fn parse(family: Family, config: &SyntheticConfig) -> Result<Self> {
        let keys = family.keys();
        if let Some(bad) = config.keys().find(|k| !keys.iter().any(|(name, _)| name == k)) {
            return Err(Error::InvalidConfig {
                family: family.to_string(),
                reason: format!("unknown key `{bad}`"),
            });
        }
        let mut values = BTreeMap::new();
        for &(name, default) in keys {
            let v = config.get(name).copied().unwrap_or(default);
            if !v.is_finite() {
                return Err(Error::InvalidConfig {
                    family: family.to_string(),
                    reason: format!("`{name}` is not finite"),
                });
            }
            values.insert(name, v);
        }
        Ok(Params { family, values })
    }

    fn get(&self, key: &str) -> f64 {
        self.values[key]
    }

    fn check(&self, ok: bool, reason: &str) -> Result<()> {
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig {
                family: self.family.to_string(),
                reason: reason.to_string(),
            })
        }
    }

    fn integer(&self, key: &str, lo: usize, hi: usize) -> Result<usize> {
        let v = self.get(key);
        self.check(
            v.fract() == 0.0 && v >= lo as f64 && v <= hi as f64,
            &format!("`{key}` must be an integer in [{lo}, {hi}]"),
        )?;
        Ok(v as usize)
    }

    fn non_negative(&self, key: &str) -> Result<f64> {
        let v = self.get(key);
        self.check(v >= 0.0, &format!("`{key}` must be non-negative"))?;
        Ok(v)
    }
}

fn normal(rng: &mut Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform on (0, 1].
fn open_unit(rng: &mut Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

fn linspace(start: f64, stop: f64, n: usize, endpoint: bool) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let div = if endpoint { (n.max(2) - 1) as f64 } else { n as f64 };
    let step = (stop - start) / div;
    (0..n).map(|i| start + step * i as f64).collect()
}

/// Draws a dataset from one of the seven synthetic families.
pub fn generate_synthetic(
    family: Family,
    config: &SyntheticConfig,
    n_samples: usize,
    seed: u64,
) -> Result<LabeledDataset> {
    if n_samples < 4 {
        return Err(Error::InvalidArgument(format!(
            "n_samples must be at least 4, got {n_samples}"
        )));
    }
    let params = Params::parse(family, config)?;
    let mut rng = seed::rng(seed);
    let (rows, labels) = match family {
        Family::Blobs => blobs(&params, n_samples, &mut rng)?,
        Family::Circles => circles(&params, n_samples, &mut rng)?,
        Family::Moons => moons(&params, n_samples, &mut rng)?,
        Family::Rings => rings(&params, n_samples, &mut rng)?,
        Family::Xor => xor(&params, n_samples, &mut rng)?,
        Family::Spiral => spiral(&params, n_samples, &mut rng)?,
        Family::Checkerboard => checkerboard(&params, n_samples, &mut rng)?,
    };
    let dim = rows[0].len();
    let features = Array2::from_shape_fn((n_samples, dim), |(i, j)| rows[i][j]);
    let mut provenance: BTreeMap<String, String> = params
        .values
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    provenance.insert("family".into(), family.to_string());
    provenance.insert("n_samples".into(), n_samples.to_string());
    let name = format!("{family}_n{n_samples}_s{seed}");
    LabeledDataset::new(name, features, labels, provenance, seed)
}

type Sample = (Vec<Vec<f64>>, Vec<u8>);

fn alternating_labels(n: usize) -> Vec<u8> {
    (0..n).map(|i| (i % 2) as u8).collect()
}

fn blobs(p: &Params, n: usize, rng: &mut Rng) -> Result<Sample> {
    let centers = p.integer("centers", 2, 8)?;
    let dim = p.integer("n_features", 1, 64)?;
    let std = p.non_negative("std")?;
    let half_box = p.get("box");
    p.check(half_box > 0.0, "`box` must be positive")?;
    let weight = p.get("weight");
    p.check(weight > 0.0 && weight < 1.0, "`weight` must lie in (0, 1)")?;

    let mut center_coords = Vec::with_capacity(centers);
    for _ in 0..centers {
        let c: Vec<f64> = (0..dim)
            .map(|_| rng.random_range(-half_box..half_box))
            .collect();
        center_coords.push(c);
    }
    // Centers with even index form class 0, odd index class 1.
    let n1 = ((n as f64) * weight).round().clamp(2.0, (n - 2) as f64) as usize;
    let n0 = n - n1;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (class, count) in [(0u8, n0), (1u8, n1)] {
        let members: Vec<usize> = (0..centers).filter(|k| k % 2 == class as usize).collect();
        for i in 0..count {
            let c = &center_coords[members[i % members.len()]];
            rows.push(c.iter().map(|&m| m + std * normal(rng)).collect());
            labels.push(class);
        }
    }
    Ok((rows, labels))
}

fn circles(p: &Params, n: usize, rng: &mut Rng) -> Result<Sample> {
    let noise = p.non_negative("noise")?;
    let factor = p.get("factor");
    p.check(factor > 0.0 && factor < 1.0, "`factor` must lie in (0, 1)")?;
    let n_out = n / 2;
    let n_in = n - n_out;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for t in linspace(0.0, 2.0 * PI, n_out, false) {
        rows.push(vec![t.cos(), t.sin()]);
        labels.push(0);
    }
    for t in linspace(0.0, 2.0 * PI, n_in, false) {
        rows.push(vec![factor * t.cos(), factor * t.sin()]);
        labels.push(1);
    }
    jitter(&mut rows, noise, rng);
    Ok((rows, labels))
}

fn moons(p: &Params, n: usize, rng: &mut Rng) -> Result<Sample> {
    let noise = p.non_negative("noise")?;
    let n_out = n / 2;
    let n_in = n - n_out;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for t in linspace(0.0, PI, n_out, true) {
        rows.push(vec![t.cos(), t.sin()]);
        labels.push(0);
    }
    for t in linspace(0.0, PI, n_in, true) {
        rows.push(vec![1.0 - t.cos(), 1.0 - t.sin() - 0.5]);
        labels.push(1);
    }
    jitter(&mut rows, noise, rng);
    Ok((rows, labels))
}

/// Alternating radial annuli: ring `r` spans radii around `r + 0.5` and
/// carries label `r % 2`.
fn rings(p: &Params, n: usize, rng: &mut Rng) -> Result<Sample> {
    let n_rings = p.integer("rings", 2, 32)?;
    let width = p.get("width");
    p.check(width > 0.0 && width <= 1.0, "`width` must lie in (0, 1]")?;
    let noise = p.non_negative("noise")?;
    let labels = alternating_labels(n);
    let mut rows = Vec::with_capacity(n);
    for &label in &labels {
        let choices: Vec<usize> = (0..n_rings).filter(|r| r % 2 == label as usize).collect();
        let ring = choices[rng.random_range(0..choices.len())];
        let radius = ring as f64 + 0.5 + width * (rng.random::<f64>() - 0.5);
        let angle = rng.random_range(0.0..2.0 * PI);
        rows.push(vec![radius * angle.cos(), radius * angle.sin()]);
    }
    jitter(&mut rows, noise, rng);
    Ok((rows, labels))
}

/// Uniform points in [-1, 1]^2 labelled by the parity of their quadrant,
/// followed by Gaussian jitter.
fn xor(p: &Params, n: usize, rng: &mut Rng) -> Result<Sample> {
    let noise = p.non_negative("noise")?;
    let labels = alternating_labels(n);
    let mut rows = Vec::with_capacity(n);
    for &label in &labels {
        let sx = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let sy = if label == 0 { sx } else { -sx };
        rows.push(vec![sx * open_unit(rng), sy * open_unit(rng)]);
    }
    jitter(&mut rows, noise, rng);
    Ok((rows, labels))
}

/// Two Archimedean arms `r = t`, `theta = 2 pi turns t + label pi`, with
/// Gaussian noise on the angle.
fn spiral(p: &Params, n: usize, rng: &mut Rng) -> Result<Sample> {
    let turns = p.get("turns");
    p.check(turns > 0.0, "`turns` must be positive")?;
    let noise = p.non_negative("noise")?;
    let labels = alternating_labels(n);
    let mut rows = Vec::with_capacity(n);
    for &label in &labels {
        let t = open_unit(rng);
        let theta = 2.0 * PI * turns * t + f64::from(label) * PI + noise * normal(rng);
        rows.push(vec![t * theta.cos(), t * theta.sin()]);
    }
    Ok((rows, labels))
}

/// k x k grid on [0, k)^2; a cell's label is the parity of its coordinates.
fn checkerboard(p: &Params, n: usize, rng: &mut Rng) -> Result<Sample> {
    let k = p.integer("k", 2, 64)?;
    let noise = p.non_negative("noise")?;
    let labels = alternating_labels(n);
    let mut rows = Vec::with_capacity(n);
    for &label in &labels {
        let cells: Vec<(usize, usize)> = (0..k)
            .flat_map(|a| (0..k).map(move |b| (a, b)))
            .filter(|(a, b)| (a + b) % 2 == label as usize)
            .collect();
        let (a, b) = cells[rng.random_range(0..cells.len())];
        rows.push(vec![a as f64 + rng.random::<f64>(), b as f64 + rng.random::<f64>()]);
    }
    jitter(&mut rows, noise, rng);
    Ok((rows, labels))
}

fn jitter(rows: &mut [Vec<f64>], noise: f64, rng: &mut Rng) {
    if noise == 0.0 {
        return;
    }
    for row in rows.iter_mut() {
        for v in row.iter_mut() {
            *v += noise * normal(rng);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(pairs: &[(&str, f64)]) -> SyntheticConfig {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn moons_noise_free_upper_arc_starts_at_one_zero() {
        let d = generate_synthetic(Family::Moons, &cfg(&[("noise", 0.0)]), 100, 3).unwrap();
        assert_eq!(d.features[[0, 0]], 1.0);
        assert_eq!(d.features[[0, 1]], 0.0);
        assert_eq!(d.labels[0], 0);
        // every upper-moon point lies on the unit circle
        for i in 0..50 {
            let r = d.features[[i, 0]].hypot(d.features[[i, 1]]);
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn xor_noise_free_labels_match_sign_parity() {
        let d = generate_synthetic(Family::Xor, &cfg(&[("noise", 0.0)]), 100, 1).unwrap();
        let wrong = (0..100)
            .filter(|&i| {
                let x = d.features[[i, 0]] > 0.0;
                let y = d.features[[i, 1]] > 0.0;
                u8::from(x ^ y) != d.labels[i]
            })
            .count();
        assert_eq!(wrong, 0);
    }

    #[test]
    fn balanced_families_differ_by_at_most_one() {
        for family in Family::ALL {
            for n in [100, 150, 151] {
                let d = generate_synthetic(family, &SyntheticConfig::new(), n, 11).unwrap();
                let [a, b] = d.class_counts();
                assert!(a.abs_diff(b) <= 1, "{family} n={n}: {a}/{b}");
            }
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let c = cfg(&[("noise", 0.1)]);
        let a = generate_synthetic(Family::Spiral, &c, 150, 5).unwrap();
        let b = generate_synthetic(Family::Spiral, &c, 150, 5).unwrap();
        assert_eq!(a, b);
        let other = generate_synthetic(Family::Spiral, &c, 150, 6).unwrap();
        assert_ne!(a.features, other.features);
    }

    #[test]
    fn rejects_unknown_key_and_family_and_tiny_n() {
        assert!(matches!(
            generate_synthetic(Family::Moons, &cfg(&[("radius", 1.0)]), 100, 0),
            Err(Error::InvalidConfig { .. })
        ));
        assert!(matches!("triangles".parse::<Family>(), Err(Error::UnknownFamily(_))));
        assert!(generate_synthetic(Family::Moons, &SyntheticConfig::new(), 3, 0).is_err());
    }

    #[test]
    fn checkerboard_cells_have_parity_labels() {
        let d = generate_synthetic(Family::Checkerboard, &cfg(&[("k", 3.0)]), 200, 2).unwrap();
        for i in 0..200 {
            let a = d.features[[i, 0]].floor() as usize;
            let b = d.features[[i, 1]].floor() as usize;
            assert_eq!(((a + b) % 2) as u8, d.labels[i]);
        }
    }

    #[test]
    fn rings_radius_parity() {
        let d = generate_synthetic(Family::Rings, &cfg(&[("rings", 4.0), ("width", 0.5)]), 200, 9)
            .unwrap();
        for i in 0..200 {
            let r = d.features[[i, 0]].hypot(d.features[[i, 1]]);
            assert_eq!((r.floor() as usize % 2) as u8, d.labels[i]);
        }
    }

    #[test]
    fn blobs_dimensions_follow_config() {
        let d = generate_synthetic(
            Family::Blobs,
            &cfg(&[("centers", 3.0), ("n_features", 4.0)]),
            150,
            4,
        )
        .unwrap();
        assert_eq!(d.n_features(), 4);
        assert_eq!(d.class_counts(), [75, 75]);
    }
}
