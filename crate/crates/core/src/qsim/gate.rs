use std::fmt;

use serde::{Deserialize, Serialize};

use super::N_QUBITS;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    RX,
    RY,
    RZ,
    P,
    CX,
    CZ,
    CRZ,
    /// Square root of iSWAP.
    SQISW,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::P => 1,
            GateKind::CX | GateKind::CZ | GateKind::CRZ | GateKind::SQISW => 2,
        }
    }

    pub fn is_parameterized(self) -> bool {
        matches!(
            self,
            GateKind::RX | GateKind::RY | GateKind::RZ | GateKind::P | GateKind::CRZ
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::RX => "RX",
            GateKind::RY => "RY",
            GateKind::RZ => "RZ",
            GateKind::P => "P",
            GateKind::CX => "CX",
            GateKind::CZ => "CZ",
            GateKind::CRZ => "CRZ",
            GateKind::SQISW => "SQISW",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A concrete gate: kind, qubits and (for rotations) a bound angle.
/// For controlled gates `targets[0]` is the control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: [usize; 2],
    pub angle: Option<f64>,
}

impl Gate {
    pub fn single(kind: GateKind, q: usize, angle: Option<f64>) -> Result<Self> {
        Gate {
            kind,
            targets: [q, q],
            angle,
        }
        .checked()
    }

    pub fn pair(kind: GateKind, a: usize, b: usize, angle: Option<f64>) -> Result<Self> {
        Gate {
            kind,
            targets: [a, b],
            angle,
        }
        .checked()
    }

    pub fn qubits(&self) -> &[usize] {
        &self.targets[..self.kind.arity()]
    }

    fn checked(self) -> Result<Self> {
        for &q in self.qubits() {
            if q >= N_QUBITS {
                return Err(Error::InvalidQubit {
                    gate: self.kind.to_string(),
                    index: q,
                });
            }
        }
        if self.kind.arity() == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::InvalidQubit {
                gate: self.kind.to_string(),
                index: self.targets[1],
            });
        }
        match (self.kind.is_parameterized(), self.angle) {
            (true, None) => Err(Error::MissingAngle(self.kind.to_string())),
            (false, Some(_)) => Err(Error::InvalidArgument(format!(
                "gate {} takes no angle",
                self.kind
            ))),
            _ => Ok(self),
        }
    }
}
