//! Benchmark environments: problem generators and data ingestion.

mod custom;
mod intel;
mod toy;

pub use custom::{build_custom_priors, CustomEnv, CustomParams};
pub use intel::{
    build_intel_priors, fit_forgetting, ingest_intel, ingest_intel_days, read_day_csv,
    write_day_csv, DayMatrix, IntelEnv, IntelPriorBuild,
};
pub use toy::{
    build_toy_priors, sample_toy_function, toy_feasible_xs, toy_grid, HillMeanSpec, ToyEnv,
    ToyParams,
};

use rand::RngCore;

use crate::gp::GpError;
use crate::point::SpaceTimePoint;

/// Errors from environment construction, ingestion or stepping.
#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("point {point} is not feasible at step {t}")]
    InfeasiblePoint { point: String, t: u32 },

    #[error("ingestion error: {0}")]
    Ingestion(String),

    #[error(transparent)]
    Gp(#[from] GpError),
}

/// Observation and instantaneous regret returned by one query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    /// Observed value, in the units the GP models see.
    pub y: f64,
    /// Gap to the best feasible point, in the environment's reporting
    /// units (these coincide for the synthetic environments).
    pub regret: f64,
}

/// A sequential black-box problem: per-step feasible sets, a hidden
/// objective queried through `step`, and the bookkeeping needed to score
/// regret. Environments are read-only after construction; per-run
/// randomness comes in through the caller's rng.
pub trait Environment: Send + Sync {
    /// Hard cap on usable steps, when the data imposes one.
    fn max_horizon(&self) -> Option<u32> {
        None
    }

    /// Noise level the GP models should assume for observations.
    fn model_noise_std(&self) -> f64;

    /// Available points at step `t` (all carrying timestep `t`).
    fn feasible_set(&self, t: u32) -> Vec<SpaceTimePoint>;

    /// Hidden objective value at a point, in observation units. Exposed
    /// for diagnostics and post-hoc trace verification, not for policies.
    fn oracle_value(&self, point: &SpaceTimePoint) -> Result<f64, EnvError>;

    /// Best achievable oracle value over the feasible set at step `t`.
    fn best_value(&self, t: u32) -> f64;

    /// Query the black box at a feasible point.
    fn step(&self, point: &SpaceTimePoint, rng: &mut dyn RngCore)
        -> Result<StepOutcome, EnvError>;
}
