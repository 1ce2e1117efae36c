use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::gate::{Gate, GateKind};
use super::{DIM, N_QUBITS};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A pure 4-qubit state. Qubit 0 is the least significant bit of the
/// amplitude index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    amps: [Complex64; DIM],
}

impl Default for StateVector {
    fn default() -> Self {
        Self::zero()
    }
}

impl StateVector {
    /// |0000>.
    pub fn zero() -> Self {
        let mut amps = [ZERO; DIM];
        amps[0] = ONE;
        StateVector { amps }
    }

    pub fn from_amplitudes(amps: [Complex64; DIM]) -> Self {
        StateVector { amps }
    }

    pub fn amplitudes(&self) -> &[Complex64; DIM] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    /// <self|other>.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
    }

    /// Multiplies every amplitude by e^{i theta}.
    pub fn with_global_phase(mut self, theta: f64) -> Self {
        let phase = Complex64::from_polar(1.0, theta);
        for a in self.amps.iter_mut() {
            *a *= phase;
        }
        self
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        for &q in gate.qubits() {
            if q >= N_QUBITS {
                return Err(Error::InvalidQubit {
                    gate: gate.kind.to_string(),
                    index: q,
                });
            }
        }
        let angle = || gate.angle.ok_or_else(|| Error::MissingAngle(gate.kind.to_string()));
        let [a, b] = gate.targets;
        match gate.kind {
            GateKind::H => {
                let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
                self.single(a, [[h, h], [h, -h]]);
            }
            GateKind::RX => {
                let t = angle()? / 2.0;
                let (c, s) = (Complex64::new(t.cos(), 0.0), Complex64::new(0.0, -t.sin()));
                self.single(a, [[c, s], [s, c]]);
            }
            GateKind::RY => {
                let t = angle()? / 2.0;
                let (c, s) = (Complex64::new(t.cos(), 0.0), Complex64::new(t.sin(), 0.0));
                self.single(a, [[c, -s], [s, c]]);
            }
            GateKind::RZ => {
                let t = angle()? / 2.0;
                self.single(
                    a,
                    [[Complex64::from_polar(1.0, -t), ZERO], [ZERO, Complex64::from_polar(1.0, t)]],
                );
            }
            GateKind::P => {
                let l = angle()?;
                self.single(a, [[ONE, ZERO], [ZERO, Complex64::from_polar(1.0, l)]]);
            }
            GateKind::CX => {
                let (cm, tm) = (1 << a, 1 << b);
                for idx in 0..DIM {
                    if idx & cm != 0 && idx & tm == 0 {
                        self.amps.swap(idx, idx | tm);
                    }
                }
            }
            GateKind::CZ => {
                let m = (1 << a) | (1 << b);
                for idx in 0..DIM {
                    if idx & m == m {
                        self.amps[idx] = -self.amps[idx];
                    }
                }
            }
            GateKind::CRZ => {
                let t = angle()? / 2.0;
                let (lo, hi) = (Complex64::from_polar(1.0, -t), Complex64::from_polar(1.0, t));
                let (cm, tm) = (1 << a, 1 << b);
                for idx in 0..DIM {
                    if idx & cm != 0 {
                        self.amps[idx] *= if idx & tm == 0 { lo } else { hi };
                    }
                }
            }
            GateKind::SQISW => {
                // identity on |00>, |11>; [[1, i], [i, 1]] / sqrt 2 on {|01>, |10>}
                let (am, bm) = (1 << a, 1 << b);
                let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
                let ri = I * FRAC_1_SQRT_2;
                for idx in 0..DIM {
                    if idx & am == 0 && idx & bm == 0 {
                        let (s, t) = (idx | am, idx | bm);
                        let (vs, vt) = (self.amps[s], self.amps[t]);
                        self.amps[s] = r * vs + ri * vt;
                        self.amps[t] = ri * vs + r * vt;
                    }
                }
            }
        }
        Ok(())
    }

    fn single(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let mask = 1 << q;
        for idx in 0..DIM {
            if idx & mask == 0 {
                let (v0, v1) = (self.amps[idx], self.amps[idx | mask]);
                self.amps[idx] = m[0][0] * v0 + m[0][1] * v1;
                self.amps[idx | mask] = m[1][0] * v0 + m[1][1] * v1;
            }
        }
    }
}

/// Applies `gate` to a copy of `s`.
pub fn apply_gate(s: &StateVector, gate: &Gate) -> Result<StateVector> {
    let mut out = *s;
    out.apply(gate)?;
    Ok(out)
}
