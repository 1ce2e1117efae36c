//! The nine encoding circuits at two layers on four qubits.
//!
//! Each circuit is a list of blocks: an optional preparation block followed
//! by one block per layer. Blocks are separated by barriers, so depth is the
//! sum of the as-soon-as-possible depths of the blocks.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::gate::{Gate, GateKind};
use super::N_QUBITS;
use crate::seed;
use crate::{Error, Result};

pub const N_LAYERS: usize = 2;

/// Seed for the fixed trainable parameters shared by every dataset.
pub const DEFAULT_PARAM_SEED: u64 = 0x5eed_0c1c;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CircuitId {
    SRx,
    HERx,
    ZFM,
    ZZFM,
    HD,
    #[serde(rename = "YZ_CX")]
    YzCx,
    #[serde(rename = "HZY_CZ")]
    HzyCz,
    PZFM,
    Chebyshev,
}

impl CircuitId {
    /// Canonical order; also the tie-break order everywhere.
    pub const ALL: [CircuitId; 9] = [
        CircuitId::SRx,
        CircuitId::HERx,
        CircuitId::ZFM,
        CircuitId::ZZFM,
        CircuitId::HD,
        CircuitId::YzCx,
        CircuitId::HzyCz,
        CircuitId::PZFM,
        CircuitId::Chebyshev,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CircuitId::SRx => "SRx",
            CircuitId::HERx => "HERx",
            CircuitId::ZFM => "ZFM",
            CircuitId::ZZFM => "ZZFM",
            CircuitId::HD => "HD",
            CircuitId::YzCx => "YZ_CX",
            CircuitId::HzyCz => "HZY_CZ",
            CircuitId::PZFM => "PZFM",
            CircuitId::Chebyshev => "Chebyshev",
        }
    }

    pub fn n_params(self) -> usize {
        match self {
            CircuitId::YzCx | CircuitId::HzyCz => 16,
            CircuitId::PZFM => 8,
            CircuitId::Chebyshev => 24,
            _ => 0,
        }
    }
}

impl fmt::Display for CircuitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CircuitId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .or(match s {
                "HZY" => Some(CircuitId::HzyCz),
                _ => None,
            })
            .ok_or_else(|| Error::UnknownId(s.to_string()))
    }
}

/// A gate angle as a function of the features `x` and parameters `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AngleExpr {
    /// `scale * x[q]`
    Feature { q: usize, scale: f64 },
    /// `2 (pi - x[i]) (pi - x[j])`
    Product { i: usize, j: usize },
    /// `p[k] * x[q]`
    ScaledFeature { k: usize, q: usize },
    /// `p[k] * arccos(2 x[q] / pi - 1)`
    Chebyshev { k: usize, q: usize },
    /// `p[k]`
    Param { k: usize },
}

impl AngleExpr {
    pub fn eval(&self, x: &[f64], p: &[f64]) -> f64 {
        match *self {
            AngleExpr::Feature { q, scale } => scale * x[q],
            AngleExpr::Product { i, j } => 2.0 * (PI - x[i]) * (PI - x[j]),
            AngleExpr::ScaledFeature { k, q } => p[k] * x[q],
            AngleExpr::Chebyshev { k, q } => p[k] * (2.0 * x[q] / PI - 1.0).clamp(-1.0, 1.0).acos(),
            AngleExpr::Param { k } => p[k],
        }
    }
}

impl fmt::Display for AngleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            AngleExpr::Feature { q, scale: 1.0 } => write!(f, "x{q}"),
            AngleExpr::Feature { q, scale } => write!(f, "{scale}*x{q}"),
            AngleExpr::Product { i, j } => write!(f, "2*(pi-x{i})*(pi-x{j})"),
            AngleExpr::ScaledFeature { k, q } => write!(f, "p{k}*x{q}"),
            AngleExpr::Chebyshev { k, q } => write!(f, "p{k}*arccos(2*x{q}/pi-1)"),
            AngleExpr::Param { k } => write!(f, "p{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateTemplate {
    pub kind: GateKind,
    pub targets: [usize; 2],
    pub angle: Option<AngleExpr>,
}

impl GateTemplate {
    fn one(kind: GateKind, q: usize, angle: Option<AngleExpr>) -> Self {
        GateTemplate {
            kind,
            targets: [q, q],
            angle,
        }
    }

    fn two(kind: GateKind, a: usize, b: usize, angle: Option<AngleExpr>) -> Self {
        GateTemplate {
            kind,
            targets: [a, b],
            angle,
        }
    }

    pub fn qubits(&self) -> &[usize] {
        &self.targets[..self.kind.arity()]
    }
}

/// Gate-level statistics of a circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Structure {
    pub n_params: usize,
    pub n_gates: usize,
    pub depth: usize,
    pub two_qubit_gate: Option<GateKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingCircuit {
    pub id: CircuitId,
    pub layers: usize,
    pub blocks: Vec<Vec<GateTemplate>>,
    pub params: Vec<f64>,
}

const CHAIN: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 3)];
const RING: [(usize, usize); 4] = [(0, 1), (1, 2), (2, 3), (3, 0)];
// Same four ring edges; (3, 0) runs next to (1, 2) so a layer is 5 deep.
const CHEBYSHEV_RING: [(usize, usize); 4] = [(0, 1), (1, 2), (3, 0), (2, 3)];

fn template(id: CircuitId) -> Vec<Vec<GateTemplate>> {
    use AngleExpr as A;
    use GateKind as G;
    let qubits = 0..N_QUBITS;
    let mut blocks = Vec::new();
    let hadamards = || qubits.clone().map(|q| GateTemplate::one(G::H, q, None)).collect::<Vec<_>>();
    if matches!(id, CircuitId::HD | CircuitId::HzyCz) {
        blocks.push(hadamards());
    }
    for l in 0..N_LAYERS {
        let mut b = Vec::new();
        match id {
            CircuitId::SRx => {
                b.extend(qubits.clone().map(|q| GateTemplate::one(G::RX, q, Some(A::Feature { q, scale: 1.0 }))));
            }
            CircuitId::HERx => {
                b.extend(qubits.clone().map(|q| GateTemplate::one(G::RX, q, Some(A::Feature { q, scale: 1.0 }))));
                b.extend(CHAIN.iter().map(|&(i, j)| GateTemplate::two(G::CX, i, j, None)));
            }
            CircuitId::ZFM => {
                b.extend(hadamards());
                b.extend(qubits.clone().map(|q| GateTemplate::one(G::P, q, Some(A::Feature { q, scale: 2.0 }))));
            }
            CircuitId::ZZFM => {
                b.extend(hadamards());
                b.extend(qubits.clone().map(|q| GateTemplate::one(G::P, q, Some(A::Feature { q, scale: 2.0 }))));
                for &(i, j) in &CHAIN {
                    b.push(GateTemplate::two(G::CX, i, j, None));
                    b.push(GateTemplate::one(G::P, j, Some(A::Product { i, j })));
                    b.push(GateTemplate::two(G::CX, i, j, None));
                }
            }
            CircuitId::HD => {
                // Z-Y-Z rotations per qubit, feature index cycling through x.
                let mut c = 0;
                for q in qubits.clone() {
                    for kind in [G::RZ, G::RY, G::RZ] {
                        b.push(GateTemplate::one(kind, q, Some(A::Feature { q: c % N_QUBITS, scale: 1.0 })));
                        c += 1;
                    }
                }
                // entanglers alternate between even and odd neighbour pairs
                let pairs: &[(usize, usize)] = if l % 2 == 0 { &[(0, 1), (2, 3)] } else { &[(1, 2)] };
                b.extend(pairs.iter().map(|&(i, j)| GateTemplate::two(G::SQISW, i, j, None)));
            }
            CircuitId::YzCx => {
                let base = 8 * l;
                b.extend(qubits.clone().map(|q| GateTemplate::one(G::RY, q, Some(A::ScaledFeature { k: base + q, q }))));
                b.extend(qubits.clone().map(|q| GateTemplate::one(G::RZ, q, Some(A::ScaledFeature { k: base + 4 + q, q }))));
                b.push(GateTemplate::two(G::CX, 0, 1, None));
                b.push(GateTemplate::two(G::CX, 2, 3, None));
            }
            CircuitId::HzyCz => {
                let base = 8 * l;
                b.extend(qubits.clone().map(|q| GateTemplate::one(G::RZ, q, Some(A::Feature { q, scale: 1.0 }))));
                b.extend(qubits.clone().map(|q| GateTemplate::one(G::RY, q, Some(A::Param { k: base + q }))));
                b.extend(
                    RING.iter()
                        .enumerate()
                        .map(|(e, &(i, j))| GateTemplate::two(G::CRZ, i, j, Some(A::Param { k: base + 4 + e }))),
                );
            }
            CircuitId::PZFM => {
                let base = 4 * l;
                b.extend(hadamards());
                b.extend(qubits.clone().map(|q| GateTemplate::one(G::P, q, Some(A::ScaledFeature { k: base + q, q }))));
                b.extend(CHAIN.iter().map(|&(i, j)| GateTemplate::two(G::CX, i, j, None)));
            }
            CircuitId::Chebyshev => {
                let base = 12 * l;
                b.extend(qubits.clone().map(|q| GateTemplate::one(G::RX, q, Some(A::Chebyshev { k: base + q, q }))));
                b.extend(qubits.clone().map(|q| GateTemplate::one(G::RY, q, Some(A::Param { k: base + 4 + q }))));
                b.extend(
                    CHEBYSHEV_RING
                        .iter()
                        .enumerate()
                        .map(|(e, &(i, j))| GateTemplate::two(G::CRZ, i, j, Some(A::Param { k: base + 8 + e }))),
                );
            }
        }
        blocks.push(b);
    }
    blocks
}

/// Draws the fixed trainable parameters of `id`: uniform on [0, 2 pi).
pub fn default_params(id: CircuitId, seed: u64) -> Vec<f64> {
    let mut rng = seed::rng(seed::derive(seed, &[id.index() as u64]));
    (0..id.n_params())
        .map(|_| rng.random_range(0.0..2.0 * PI))
        .collect()
}

impl EncodingCircuit {
    /// Builds circuit `id` with explicit trainable parameters.
    pub fn new(id: CircuitId, params: Vec<f64>) -> Result<Self> {
        if params.len() != id.n_params() {
            return Err(Error::ParamCount {
                circuit: id.to_string(),
                expected: id.n_params(),
                got: params.len(),
            });
        }
        Ok(EncodingCircuit {
            id,
            layers: N_LAYERS,
            blocks: template(id),
            params,
        })
    }

    /// Builds circuit `id` with parameters drawn from `seed`.
    pub fn with_seed(id: CircuitId, seed: u64) -> Self {
        Self::new(id, default_params(id, seed)).expect("parameter count matches by construction")
    }

    /// All nine circuits with the shared default parameters.
    pub fn all_default() -> Vec<EncodingCircuit> {
        CircuitId::ALL
            .iter()
            .map(|&id| Self::with_seed(id, DEFAULT_PARAM_SEED))
            .collect()
    }

    pub fn gates(&self) -> impl Iterator<Item = &GateTemplate> {
        self.blocks.iter().flatten()
    }

    pub fn n_gates(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    /// ASAP depth with a barrier between blocks.
    pub fn depth(&self) -> usize {
        let mut total = 0;
        for block in &self.blocks {
            let mut level = [0usize; N_QUBITS];
            for g in block {
                let next = g.qubits().iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
                for &q in g.qubits() {
                    level[q] = next;
                }
            }
            total += level.iter().copied().max().unwrap_or(0);
        }
        total
    }

    pub fn structure(&self) -> Structure {
        let two_qubit_gate = self.gates().map(|g| g.kind).find(|k| k.arity() == 2);
        Structure {
            n_params: self.params.len(),
            n_gates: self.n_gates(),
            depth: self.depth(),
            two_qubit_gate,
        }
    }

    /// Concrete gates for one input vector.
    pub fn bind(&self, x: &[f64]) -> Result<Vec<Gate>> {
        if x.len() != N_QUBITS {
            return Err(Error::Dimension(format!(
                "{} expects {N_QUBITS} features, got {}",
                self.id,
                x.len()
            )));
        }
        self.gates()
            .map(|t| {
                let angle = t.angle.map(|a| a.eval(x, &self.params));
                if t.kind.arity() == 1 {
                    Gate::single(t.kind, t.targets[0], angle)
                } else {
                    Gate::pair(t.kind, t.targets[0], t.targets[1], angle)
                }
            })
            .collect()
    }

    /// Human-readable gate list, one gate per line.
    pub fn describe(&self) -> String {
        let s = self.structure();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "circuit {} params={} gates={} depth={} two_qubit={}",
            self.id,
            s.n_params,
            s.n_gates,
            s.depth,
            s.two_qubit_gate.map_or("-", GateKind::name)
        );
        for (bi, block) in self.blocks.iter().enumerate() {
            let _ = writeln!(out, "  block {bi}");
            for g in block {
                let qs = g
                    .qubits()
                    .iter()
                    .map(|q| format!("q{q}"))
                    .collect::<Vec<_>>()
                    .join(",");
                match g.angle {
                    Some(a) => {
                        let _ = writeln!(out, "    {}({a}) {qs}", g.kind);
                    }
                    None => {
                        let _ = writeln!(out, "    {} {qs}", g.kind);
                    }
                }
            }
        }
        out
    }
}

/// The circuit manifest: every circuit's symbolic gate list.
pub fn circuit_manifest() -> String {
    let mut out = String::from("# encoding circuit manifest v1 (4 qubits, 2 layers)\n");
    for id in CircuitId::ALL {
        let c = EncodingCircuit::new(id, vec![0.0; id.n_params()]).expect("valid id");
        out.push_str(&c.describe());
    }
    out
}
