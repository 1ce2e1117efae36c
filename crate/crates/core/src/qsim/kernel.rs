use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;

use super::circuit::{CircuitId, EncodingCircuit};
use super::state::StateVector;
use super::N_QUBITS;
use crate::cost::CostCounter;
use crate::{Error, Result};

// Slack for values that round just past pi after scaling.
const DOMAIN_SLACK: f64 = 1e-12;

static PREPARED_STATES: AtomicU64 = AtomicU64::new(0);

/// Number of states prepared by [`encode`] in this process so far.
pub fn prepared_states() -> u64 {
    PREPARED_STATES.load(Ordering::Relaxed)
}

/// Prepares `U(x)|0000>`.
pub fn encode(c: &EncodingCircuit, x: &[f64]) -> Result<StateVector> {
    if x.len() != N_QUBITS {
        return Err(Error::Dimension(format!(
            "expected {N_QUBITS} features, got {}",
            x.len()
        )));
    }
    for (index, &value) in x.iter().enumerate() {
        if !(-DOMAIN_SLACK..=PI + DOMAIN_SLACK).contains(&value) {
            return Err(Error::FeatureOutOfDomain { index, value });
        }
    }
    PREPARED_STATES.fetch_add(1, Ordering::Relaxed);
    let mut s = StateVector::zero();
    for g in c.bind(x)? {
        s.apply(&g)?;
    }
    Ok(s)
}

fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
    a.inner(b).norm_sqr().clamp(0.0, 1.0)
}

/// `|<phi(x)|phi(y)>|^2`.
pub fn kernel(c: &EncodingCircuit, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(fidelity(&encode(c, x)?, &encode(c, y)?))
}

/// A kernel matrix between two sample sets.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    pub circuit_id: CircuitId,
    pub entries: Array2<f64>,
    pub row_ids: Vec<usize>,
    pub col_ids: Vec<usize>,
}

impl GramMatrix {
    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.entries.view()
    }

    pub fn is_square(&self) -> bool {
        self.entries.nrows() == self.entries.ncols()
    }

    /// Writes the matrix as CSV with sample ids as header and first column.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::from("id");
        for c in &self.col_ids {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
        for (i, row) in self.entries.rows().into_iter().enumerate() {
            out.push_str(&self.row_ids[i].to_string());
            for v in row {
                out.push_str(&format!(",{v:.17e}"));
            }
            out.push('\n');
        }
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
    }
}

fn encode_rows(c: &EncodingCircuit, a: ArrayView2<f64>) -> Result<Vec<StateVector>> {
    if a.ncols() != N_QUBITS {
        return Err(Error::Dimension(format!(
            "sample matrix has {} columns, expected {N_QUBITS}",
            a.ncols()
        )));
    }
    let rows: Vec<ArrayView1<f64>> = a.outer_iter().collect();
    rows.into_par_iter().map(|row| encode(c, &row.to_vec())).collect()
}

/// Fidelity kernel bound to one circuit, optionally reporting to a counter.
#[derive(Debug, Clone, Copy)]
pub struct FidelityKernel<'a> {
    pub circuit: &'a EncodingCircuit,
    pub counter: Option<&'a CostCounter>,
}

impl<'a> FidelityKernel<'a> {
    pub fn new(circuit: &'a EncodingCircuit) -> Self {
        FidelityKernel {
            circuit,
            counter: None,
        }
    }

    pub fn with_counter(mut self, counter: &'a CostCounter) -> Self {
        self.counter = Some(counter);
        self
    }

    fn record(&self, evaluations: usize) {
        if let Some(c) = self.counter {
            c.add_gram();
            c.add_kernel_evaluations(evaluations as u64);
        }
    }

    /// Entry `(i, j)` is `k(a_i, b_j)`; each row is encoded once.
    pub fn gram(&self, a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<GramMatrix> {
        let sa = encode_rows(self.circuit, a)?;
        let sb = encode_rows(self.circuit, b)?;
        let rows: Vec<Vec<f64>> = sa
            .par_iter()
            .map(|x| sb.iter().map(|y| fidelity(x, y)).collect())
            .collect();
        let mut entries = Array2::zeros((sa.len(), sb.len()));
        for (i, row) in rows.into_iter().enumerate() {
            for (j, v) in row.into_iter().enumerate() {
                entries[[i, j]] = v;
            }
        }
        self.record(sa.len() * sb.len());
        Ok(GramMatrix {
            circuit_id: self.circuit.id,
            entries,
            row_ids: (0..sa.len()).collect(),
            col_ids: (0..sb.len()).collect(),
        })
    }

    /// Square Gram of `a` with itself: exactly symmetric, unit diagonal.
    pub fn gram_symmetric(&self, a: ArrayView2<f64>) -> Result<GramMatrix> {
        let s = encode_rows(self.circuit, a)?;
        let n = s.len();
        let upper: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| (i + 1..n).map(|j| fidelity(&s[i], &s[j])).collect())
            .collect();
        let mut entries = Array2::eye(n);
        for (i, row) in upper.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                let j = i + 1 + off;
                entries[[i, j]] = v;
                entries[[j, i]] = v;
            }
        }
        self.record(n * (n + 1) / 2);
        Ok(GramMatrix {
            circuit_id: self.circuit.id,
            entries,
            row_ids: (0..n).collect(),
            col_ids: (0..n).collect(),
        })
    }
}

pub fn gram(c: &EncodingCircuit, a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<GramMatrix> {
    FidelityKernel::new(c).gram(a, b)
}

pub fn gram_symmetric(c: &EncodingCircuit, a: ArrayView2<f64>) -> Result<GramMatrix> {
    FidelityKernel::new(c).gram_symmetric(a)
}
