//! The policy interface driven by the experiment runner.

use rand::RngCore;

use super::PolicyError;
use crate::gp::ObservationLog;
use crate::point::SpaceTimePoint;

/// Model-side context of a chosen point, when a prior was involved.
#[derive(Clone, Debug)]
pub struct ChoiceModel {
    pub prior_index: usize,
    pub prior_id: String,
    /// Acquisition value at the chosen point.
    pub ucb: f64,
    /// Posterior mean at the chosen point under the acting prior.
    pub mean: f64,
    /// Posterior standard deviation at the chosen point, recorded at
    /// selection time (pre-observation).
    pub sigma: f64,
    /// Confidence width multiplier used this step.
    pub beta: f64,
}

/// A policy's decision at one timestep.
#[derive(Clone, Debug)]
pub struct Choice {
    pub point_index: usize,
    pub point: SpaceTimePoint,
    /// `None` for policies that do not act through a prior (random search).
    pub model: Option<ChoiceModel>,
}

/// State changes from incorporating an observation.
#[derive(Clone, Debug, Default)]
pub struct StepUpdate {
    /// Prediction error `y - mean` under the acting prior.
    pub eta: Option<f64>,
    /// Threshold scale used by an elimination test this step.
    pub xi: Option<f64>,
    /// Priors eliminated this step, by index.
    pub eliminated: Vec<usize>,
    /// Prior re-inserted by the fail-soft recovery, if any.
    pub reinserted: Option<usize>,
}

/// A sequential decision policy. One instance serves one run; the runner
/// alternates `choose` and `record` for `t = 1..=T`.
pub trait Policy: Send {
    /// Stable identifier used in traces and reports.
    fn name(&self) -> &str;

    /// Pick a point from `feasible` (all carrying the current `t`) given
    /// the observation log so far.
    fn choose(
        &mut self,
        t: u32,
        feasible: &[SpaceTimePoint],
        log: &ObservationLog,
        rng: &mut dyn RngCore,
    ) -> Result<Choice, PolicyError>;

    /// Incorporate the observed value for the point chosen at `t`.
    fn record(&mut self, t: u32, choice: &Choice, y: f64) -> Result<StepUpdate, PolicyError>;
}

/// Outcome of an argmax over feasible points and priors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectOutcome {
    pub point_index: usize,
    pub prior_index: usize,
    pub ucb: f64,
    pub mean: f64,
    pub sigma: f64,
}
