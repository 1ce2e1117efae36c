//! Four-qubit statevector simulation and fidelity kernels.

mod circuit;
mod gate;
mod kernel;
mod state;

pub use circuit::{
    circuit_manifest, default_params, AngleExpr, CircuitId, EncodingCircuit, GateTemplate,
    Structure, DEFAULT_PARAM_SEED, N_LAYERS,
};
pub use gate::{Gate, GateKind};
pub use kernel::{encode, gram, gram_symmetric, kernel, prepared_states, FidelityKernel, GramMatrix};
pub use state::{apply_gate, StateVector};

pub use crate::datagen::N_QUBITS;

/// Amplitude count of a 4-qubit state.
pub const DIM: usize = 1 << N_QUBITS;
