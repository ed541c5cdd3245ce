//! Batch driver for `pauli-core`: JSON configs in, CSV tables and a plain
//! text report out.

pub mod acceptance;
pub mod config;
pub mod run;
pub mod table;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind};
pub use run::{execute, RunError, Summary};
