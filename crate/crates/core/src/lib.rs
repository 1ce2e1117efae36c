//! Encoding-circuit recommendation for fidelity quantum kernels.
//!
//! The crate covers the whole pipeline: dataset generation and
//! preprocessing ([`datagen`]), the 24 classical complexity descriptors
//! ([`complexity`]), a 4-qubit statevector simulator with the nine encoding
//! circuits ([`qsim`]), kernel classifiers that produce ground-truth labels
//! ([`evaluator`]) and the meta-learner that maps complexity vectors to
//! ranked circuit lists ([`metalearn`]).

pub mod complexity;
pub mod cost;
pub mod datagen;
pub mod error;
pub mod evaluator;
pub mod linalg;
pub mod metalearn;
pub mod qsim;
pub mod seed;
pub mod svm;

pub use error::{Error, Result};
