//! Monte-Carlo harness, file formats and CLI plumbing around [`irsfac`].
//!
//! - [`config`]: key-value experiment files and scenario presets.
//! - [`experiment`]: seeded, parallel trial runner.
//! - [`messages`]: random feedback messages for codec checks.
//! - [`output`]: CSV rows.
//! - [`phase_file`]: plain-text phase vectors for the `decompose` command.

pub mod config;
pub mod experiment;
pub mod messages;
pub mod output;
pub mod phase_file;

pub use config::{ExperimentConfig, ModelSpec, Scenario, SweepVar};
pub use experiment::{run_experiment, trial_seed};
pub use output::{emit_csv, read_csv, write_csv, ResultRow};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] irsfac::Error),
    #[error(transparent)]
    Codec(#[from] irsfac::CodecError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Input(String),
}
