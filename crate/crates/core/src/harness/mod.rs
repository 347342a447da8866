//! Experiment runner: configuration, seeded replications, trace
//! persistence, aggregate statistics and CSV/SVG emission.

mod aggregate;
mod config;
mod emit;
mod runner;
mod svg;
mod trace;

pub use aggregate::{aggregate, read_report, write_report, AggregateReport, AlgorithmSummary};
pub use config::{
    ExperimentConfig, ExperimentKind, FullyBayesianConfig, IntelConfig, RegretBalancingConfig,
    REGISTERED_ALGORITHMS,
};
pub use emit::{emit, read_histogram_csv, read_regret_csv, EmitFormat};
pub use runner::{persist_traces, run_experiment, stream_rng, CellFailure, RunOutcome};
pub use trace::{RunTrace, StepRecord};

use std::path::PathBuf;

/// Errors from the harness layer.
#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),

    #[error("aggregation error: {0}")]
    Aggregation(String),

    #[error("trace invariant violated: {0}")]
    Trace(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error at {}: {message}", path.display())]
    Csv { path: PathBuf, message: String },
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }
}
