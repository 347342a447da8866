//! Prior-elimination GP-UCB.
//!
//! Doubly optimistic selection (over points and surviving priors) plus an
//! online elimination test on each prior's cumulative prediction error:
//! a prior leaves the candidate set once `|sum eta_i|` over its ledger
//! exceeds `sqrt(xi_t |S^p|) + sum beta_i sigma_i`.

use rand::RngCore;

use super::confidence::ConfidenceSchedule;
use super::policy::{Choice, ChoiceModel, Policy, SelectOutcome, StepUpdate};
use super::state::PolicyState;
use super::PolicyError;
use crate::gp::{predict_group, GpPrior, ObservationLog, PosteriorModel};
use crate::point::SpaceTimePoint;

pub struct PeGpUcb {
    priors: Vec<GpPrior>,
    schedule: ConfidenceSchedule,
    noise_std: f64,
    state: PolicyState,
}

impl PeGpUcb {
    pub fn new(
        priors: Vec<GpPrior>,
        schedule: ConfidenceSchedule,
        noise_std: f64,
    ) -> Result<Self, PolicyError> {
        if priors.is_empty() {
            return Err(PolicyError::Parameter("candidate prior set is empty".into()));
        }
        if !(noise_std > 0.0) {
            return Err(PolicyError::Parameter(format!(
                "noise_std must be positive, got {noise_std}"
            )));
        }
        let state = PolicyState::new(priors.iter().map(|p| p.id().to_string()));
        Ok(Self { priors, schedule, noise_std, state })
    }

    pub fn state(&self) -> &PolicyState {
        &self.state
    }

    pub fn priors(&self) -> &[GpPrior] {
        &self.priors
    }

    /// Argmax of `mean + beta * sigma` over feasible points and surviving
    /// priors. `models` and `betas` are aligned with the registered prior
    /// list; only surviving entries are read. Ties break lexicographically
    /// by (prior index, point index).
    pub fn select(
        state: &PolicyState,
        models: &[Option<PosteriorModel>],
        betas: &[f64],
        feasible: &[SpaceTimePoint],
    ) -> Result<SelectOutcome, PolicyError> {
        let surviving = state.surviving();
        if surviving.is_empty() {
            return Err(PolicyError::EmptySurvivingSet);
        }
        if feasible.is_empty() {
            return Err(PolicyError::Parameter("feasible set is empty".into()));
        }
        let active: Vec<&PosteriorModel> = surviving
            .iter()
            .map(|&i| models[i].as_ref().expect("surviving prior must be fitted"))
            .collect();
        let n_x = feasible.len();
        let mut means = vec![0.0; active.len() * n_x];
        let mut sigmas = vec![0.0; active.len() * n_x];
        for (xi, x) in feasible.iter().enumerate() {
            for (si, (mean, var)) in predict_group(&active, x).into_iter().enumerate() {
                means[si * n_x + xi] = mean;
                sigmas[si * n_x + xi] = var.sqrt();
            }
        }
        let mut best: Option<SelectOutcome> = None;
        for (si, &p) in surviving.iter().enumerate() {
            for xi in 0..n_x {
                let mean = means[si * n_x + xi];
                let sigma = sigmas[si * n_x + xi];
                let ucb = mean + betas[p] * sigma;
                if best.map_or(true, |b| ucb > b.ucb) {
                    best = Some(SelectOutcome { point_index: xi, prior_index: p, ucb, mean, sigma });
                }
            }
        }
        Ok(best.expect("non-empty candidate grid"))
    }

    /// Ledger update and elimination test after observing `y` for a step
    /// acted under `prior_index`. `mean` and `sigma` are the selection-time
    /// posterior statistics at the chosen point and `beta` the width used.
    ///
    /// At most one prior is eliminated per call. If that elimination would
    /// empty the surviving set (possible only through numerical accident),
    /// the eliminated prior with the smallest threshold excess is
    /// re-inserted and flagged in the update.
    #[allow(clippy::too_many_arguments)]
    pub fn update(
        state: &mut PolicyState,
        schedule: &ConfidenceSchedule,
        noise_std: f64,
        t: u32,
        prior_index: usize,
        y: f64,
        mean: f64,
        sigma: f64,
        beta: f64,
    ) -> Result<StepUpdate, PolicyError> {
        if state.ledger(prior_index).eliminated {
            return Err(PolicyError::Parameter(format!(
                "prior index {prior_index} was already eliminated"
            )));
        }
        let xi_t = schedule.xi(noise_std, state.num_priors(), t)?;
        let eta = y - mean;
        let ledger = state.ledger_mut(prior_index);
        ledger.selected_steps.push(t);
        ledger.eta_sum += eta;
        ledger.value_sum += y;
        ledger.beta_sigma_sum += beta * sigma;
        let threshold = (xi_t * ledger.times_selected() as f64).sqrt() + ledger.beta_sigma_sum;
        let mut update = StepUpdate {
            eta: Some(eta),
            xi: Some(xi_t),
            ..StepUpdate::default()
        };
        if ledger.eta_sum.abs() > threshold {
            ledger.eliminated = true;
            ledger.violation = Some(ledger.eta_sum.abs() - threshold);
            update.eliminated.push(prior_index);
            if state.num_surviving() == 0 {
                let back = state
                    .smallest_violation()
                    .expect("an eliminated prior must exist here");
                let ledger = state.ledger_mut(back);
                ledger.eliminated = false;
                ledger.violation = None;
                update.reinserted = Some(back);
            }
        }
        Ok(update)
    }

    fn fit_surviving(
        &self,
        log: &ObservationLog,
    ) -> Result<Vec<Option<PosteriorModel>>, PolicyError> {
        let surviving = self.state.surviving();
        let subset: Vec<GpPrior> = surviving.iter().map(|&i| self.priors[i].clone()).collect();
        let fitted = PosteriorModel::fit_many(&subset, log)?;
        let mut models: Vec<Option<PosteriorModel>> = (0..self.priors.len()).map(|_| None).collect();
        for (&i, model) in surviving.iter().zip(fitted) {
            models[i] = Some(model);
        }
        Ok(models)
    }
}

impl Policy for PeGpUcb {
    fn name(&self) -> &str {
        "pe-gp-ucb"
    }

    fn choose(
        &mut self,
        t: u32,
        feasible: &[SpaceTimePoint],
        log: &ObservationLog,
        _rng: &mut dyn RngCore,
    ) -> Result<Choice, PolicyError> {
        let models = self.fit_surviving(log)?;
        let mut betas = vec![0.0; self.priors.len()];
        for &i in &self.state.surviving() {
            betas[i] = self.schedule.beta(&self.priors[i], t)?;
        }
        let sel = Self::select(&self.state, &models, &betas, feasible)?;
        Ok(Choice {
            point_index: sel.point_index,
            point: feasible[sel.point_index].clone(),
            model: Some(ChoiceModel {
                prior_index: sel.prior_index,
                prior_id: self.priors[sel.prior_index].id().to_string(),
                ucb: sel.ucb,
                mean: sel.mean,
                sigma: sel.sigma,
                beta: betas[sel.prior_index],
            }),
        })
    }

    fn record(&mut self, t: u32, choice: &Choice, y: f64) -> Result<StepUpdate, PolicyError> {
        let model = choice
            .model
            .as_ref()
            .ok_or_else(|| PolicyError::Parameter("choice carries no acting prior".into()))?;
        Self::update(
            &mut self.state,
            &self.schedule,
            self.noise_std,
            t,
            model.prior_index,
            y,
            model.mean,
            model.sigma,
            model.beta,
        )
    }
}
