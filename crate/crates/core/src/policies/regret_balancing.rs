//! Regret balancing over candidate priors.
//!
//! Priors are scheduled by their suspected regret bounds; once every
//! surviving prior has acted at least once, priors whose confidence-
//! adjusted mean observed value falls below the best lower bound are
//! eliminated. Sound for stationary problems only, which is exactly what
//! makes it an informative baseline here.

use rand::RngCore;

use super::confidence::ConfidenceSchedule;
use super::policy::{Choice, ChoiceModel, Policy, StepUpdate};
use super::state::PolicyState;
use super::PolicyError;
use crate::gp::{GpPrior, ObservationLog, PosteriorModel};
use crate::point::SpaceTimePoint;

/// Suspected regret bound `R^p(s) = s^exponent`, shared by all priors.
/// The default exponent 1 makes the schedule a plain round-robin.
#[derive(Clone, Copy, Debug)]
pub struct SuspectedBound {
    pub exponent: f64,
}

impl Default for SuspectedBound {
    fn default() -> Self {
        Self { exponent: 1.0 }
    }
}

impl SuspectedBound {
    fn eval(&self, s: usize) -> f64 {
        (s as f64).powf(self.exponent)
    }
}

pub struct RegretBalancing {
    priors: Vec<GpPrior>,
    schedule: ConfidenceSchedule,
    noise_std: f64,
    bound: SuspectedBound,
    state: PolicyState,
}

impl RegretBalancing {
    pub fn new(
        priors: Vec<GpPrior>,
        schedule: ConfidenceSchedule,
        noise_std: f64,
        bound: SuspectedBound,
    ) -> Result<Self, PolicyError> {
        if priors.is_empty() {
            return Err(PolicyError::Parameter("candidate prior set is empty".into()));
        }
        if !(noise_std > 0.0) {
            return Err(PolicyError::Parameter(format!(
                "noise_std must be positive, got {noise_std}"
            )));
        }
        if !bound.exponent.is_finite() || bound.exponent <= 0.0 {
            return Err(PolicyError::Parameter(format!(
                "suspected bound exponent must be positive, got {}",
                bound.exponent
            )));
        }
        let state = PolicyState::new(priors.iter().map(|p| p.id().to_string()));
        Ok(Self { priors, schedule, noise_std, bound, state })
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }

    /// Next acting prior: argmin of `R^p(|S^p| + 1)` over survivors, ties
    /// to the lowest index.
    pub fn next_prior(state: &PolicyState, bound: SuspectedBound) -> Result<usize, PolicyError> {
        let surviving = state.surviving();
        if surviving.is_empty() {
            return Err(PolicyError::EmptySurvivingSet);
        }
        let mut best = surviving[0];
        let mut best_value = bound.eval(state.ledger(best).times_selected() + 1);
        for &p in &surviving[1..] {
            let v = bound.eval(state.ledger(p).times_selected() + 1);
            if v < best_value {
                best = p;
                best_value = v;
            }
        }
        Ok(best)
    }

    /// Elimination sweep once every surviving prior has acted: drop each
    /// prior whose `L_t(p)` plus its mean confidence width falls below
    /// `max_p' L_t(p')`, where `L_t(p)` is the mean observed value under
    /// `p` minus `sqrt(xi_t / |S^p|)`.
    fn eliminate(state: &mut PolicyState, xi_t: f64) -> Vec<usize> {
        let surviving = state.surviving();
        if surviving
            .iter()
            .any(|&p| state.ledger(p).times_selected() == 0)
        {
            return Vec::new();
        }
        let lower: Vec<f64> = surviving
            .iter()
            .map(|&p| {
                let l = state.ledger(p);
                let s = l.times_selected() as f64;
                l.value_sum / s - (xi_t / s).sqrt()
            })
            .collect();
        let best = lower.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut eliminated = Vec::new();
        for (&p, &l_p) in surviving.iter().zip(&lower) {
            let ledger = state.ledger(p);
            let width = ledger.beta_sigma_sum / ledger.times_selected() as f64;
            if l_p + width < best {
                let ledger = state.ledger_mut(p);
                ledger.eliminated = true;
                ledger.violation = Some(best - (l_p + width));
                eliminated.push(p);
            }
        }
        eliminated
    }
}

impl Policy for RegretBalancing {
    fn name(&self) -> &str {
        "regret-balancing"
    }

    fn choose(
        &mut self,
        t: u32,
        feasible: &[SpaceTimePoint],
        log: &ObservationLog,
        _rng: &mut dyn RngCore,
    ) -> Result<Choice, PolicyError> {
        if feasible.is_empty() {
            return Err(PolicyError::Parameter("feasible set is empty".into()));
        }
        let p = Self::next_prior(&self.state, self.bound)?;
        let beta = self.schedule.beta(&self.priors[p], t)?;
        let model = PosteriorModel::fit(&self.priors[p], log)?;
        let mut best = (0usize, f64::NEG_INFINITY, 0.0, 0.0);
        for (xi, x) in feasible.iter().enumerate() {
            let (mean, var) = model.predict(x);
            let sigma = var.sqrt();
            let ucb = mean + beta * sigma;
            if ucb > best.1 {
                best = (xi, ucb, mean, sigma);
            }
        }
        let (point_index, ucb, mean, sigma) = best;
        Ok(Choice {
            point_index,
            point: feasible[point_index].clone(),
            model: Some(ChoiceModel {
                prior_index: p,
                prior_id: self.priors[p].id().to_string(),
                ucb,
                mean,
                sigma,
                beta,
            }),
        })
    }

    fn record(&mut self, t: u32, choice: &Choice, y: f64) -> Result<StepUpdate, PolicyError> {
        let model = choice
            .model
            .as_ref()
            .ok_or_else(|| PolicyError::Parameter("choice carries no acting prior".into()))?;
        let xi_t = self.schedule.xi(self.noise_std, self.state.num_priors(), t)?;
        {
            let ledger = self.state.ledger_mut(model.prior_index);
            ledger.selected_steps.push(t);
            ledger.value_sum += y;
            ledger.eta_sum += y - model.mean;
            ledger.beta_sigma_sum += model.beta * model.sigma;
        }
        let eliminated = Self::eliminate(&mut self.state, xi_t);
        Ok(StepUpdate {
            eta: Some(y - model.mean),
            xi: Some(xi_t),
            eliminated,
            reinserted: None,
        })
    }
}
