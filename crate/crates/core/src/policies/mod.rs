//! Decision policies: prior-elimination GP-UCB and its baselines.

mod baselines;
mod confidence;
mod pe_gp_ucb;
mod policy;
mod regret_balancing;
mod state;

pub use baselines::{
    fully_bayesian_select, fully_bayesian_weights, mle_select, FullyBayesianUcb, KnownPriorUcb,
    MleUcb, RandomSearch,
};
pub use confidence::{beta_continuous, beta_finite, xi, ConfidenceSchedule, DomainCardinality};
pub use pe_gp_ucb::PeGpUcb;
pub use policy::{Choice, ChoiceModel, Policy, SelectOutcome, StepUpdate};
pub use regret_balancing::{RegretBalancing, SuspectedBound};
pub use state::{PolicyState, PriorLedger};

use crate::gp::GpError;

/// Errors from the policy layer.
#[derive(Debug, thiserror::Error)]
pub enum PolicyError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// All candidate priors were eliminated. Cannot happen through the
    /// public policy loop, which re-inserts the least-violating prior.
    #[error("surviving prior set is empty")]
    EmptySurvivingSet,

    #[error(transparent)]
    Gp(#[from] GpError),
}
