//! Orchestration of the encoding-circuit recommender: building the
//! meta-dataset, training, recommending and verifying.

pub mod commands;
pub mod config;
pub mod events;
pub mod metafile;
pub mod pipeline;
pub mod report;

pub use config::{LoocvGrid, Overrides, PipelineConfig};
