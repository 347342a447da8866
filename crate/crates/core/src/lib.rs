//! Time-varying Gaussian-process bandits with candidate-prior elimination.
//!
//! The crate is organised in four layers:
//!
//! - [`gp`]: spatio-temporal kernels, exact GP posteriors, marginal
//!   likelihood and information gain;
//! - [`policies`]: the prior-elimination UCB policy and its baselines
//!   (type-II MLE, fully Bayesian weighting, regret balancing, random
//!   search, known-prior UCB);
//! - [`envs`]: benchmark environments — a synthetic hilly-mean problem
//!   with a time-alternating search space, a sensor-temperature task
//!   built from empirical covariances, and a small configurable
//!   finite-arm instance;
//! - [`harness`]: seeded experiment runner, trace persistence, aggregate
//!   statistics and CSV/SVG reporting.

pub mod envs;
pub mod gp;
pub mod harness;
pub mod point;
pub mod policies;

pub use gp::{
    fit_posterior, information_gain, log_marginal_likelihood, tv_rbf_kernel, GpError, GpPrior,
    Kernel, ObservationLog, PosteriorModel,
};
pub use point::{Location, SpaceTimePoint};
pub use policies::{ConfidenceSchedule, Policy, PolicyError};
