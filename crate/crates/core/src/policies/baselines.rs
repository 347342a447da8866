//! Baseline policies: type-II MLE, fully Bayesian weighting, seeded
//! random search and the known-prior UCB oracle.

use rand::distributions::{Distribution, Uniform};
use rand::RngCore;

use super::confidence::ConfidenceSchedule;
use super::policy::{Choice, ChoiceModel, Policy, SelectOutcome, StepUpdate};
use super::PolicyError;
use crate::gp::{predict_group, GpPrior, ObservationLog, PosteriorModel};
use crate::point::SpaceTimePoint;

fn check_feasible(feasible: &[SpaceTimePoint]) -> Result<(), PolicyError> {
    if feasible.is_empty() {
        return Err(PolicyError::Parameter("feasible set is empty".into()));
    }
    Ok(())
}

/// Argmax of the UCB of a single model over feasible points, ties to the
/// lowest point index.
fn ucb_argmax(
    model: &PosteriorModel,
    beta: f64,
    feasible: &[SpaceTimePoint],
) -> (usize, f64, f64, f64) {
    let mut best = (0usize, f64::NEG_INFINITY, 0.0, 0.0);
    for (xi, x) in feasible.iter().enumerate() {
        let (mean, var) = model.predict(x);
        let sigma = var.sqrt();
        let ucb = mean + beta * sigma;
        if ucb > best.1 {
            best = (xi, ucb, mean, sigma);
        }
    }
    best
}

/// Prior choice by highest marginal likelihood, then UCB argmax under the
/// chosen prior. `evidence`, `models` and `betas` are aligned; ties break
/// to the lowest index.
pub fn mle_select(
    evidence: &[f64],
    models: &[&PosteriorModel],
    betas: &[f64],
    feasible: &[SpaceTimePoint],
) -> Result<SelectOutcome, PolicyError> {
    check_feasible(feasible)?;
    if models.is_empty() {
        return Err(PolicyError::Parameter("no candidate priors".into()));
    }
    let mut p_best = 0usize;
    for (i, &e) in evidence.iter().enumerate() {
        if e > evidence[p_best] {
            p_best = i;
        }
    }
    let (point_index, ucb, mean, sigma) = ucb_argmax(models[p_best], betas[p_best], feasible);
    Ok(SelectOutcome { point_index, prior_index: p_best, ucb, mean, sigma })
}

/// Posterior weights over priors from log evidence and a log hyperprior,
/// normalised through log-sum-exp.
pub fn fully_bayesian_weights(log_evidence: &[f64], log_hyperprior: &[f64]) -> Vec<f64> {
    assert_eq!(log_evidence.len(), log_hyperprior.len());
    let combined: Vec<f64> = log_evidence
        .iter()
        .zip(log_hyperprior)
        .map(|(e, h)| e + h)
        .collect();
    let max = combined.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let unnorm: Vec<f64> = combined.iter().map(|c| (c - max).exp()).collect();
    let total: f64 = unnorm.iter().sum();
    unnorm.into_iter().map(|w| w / total).collect()
}

/// Argmax over feasible points of the weight-averaged UCB surface
/// `sum_p w_p (mean_p + beta_p sigma_p)`; ties to the lowest point index.
pub fn fully_bayesian_select(
    weights: &[f64],
    models: &[&PosteriorModel],
    betas: &[f64],
    feasible: &[SpaceTimePoint],
) -> Result<(usize, f64), PolicyError> {
    check_feasible(feasible)?;
    if models.is_empty() {
        return Err(PolicyError::Parameter("no candidate priors".into()));
    }
    let mut best = (0usize, f64::NEG_INFINITY);
    for (xi, x) in feasible.iter().enumerate() {
        let preds = predict_group(models, x);
        let acq: f64 = preds
            .iter()
            .zip(weights)
            .zip(betas)
            .map(|(((mean, var), w), beta)| w * (mean + beta * var.sqrt()))
            .sum();
        if acq > best.1 {
            best = (xi, acq);
        }
    }
    Ok(best)
}

/// Type-II maximum-likelihood prior selection with UCB acquisition.
/// Before any data the prior is drawn uniformly at random.
pub struct MleUcb {
    priors: Vec<GpPrior>,
    schedule: ConfidenceSchedule,
}

impl MleUcb {
    pub fn new(priors: Vec<GpPrior>, schedule: ConfidenceSchedule) -> Result<Self, PolicyError> {
        if priors.is_empty() {
            return Err(PolicyError::Parameter("candidate prior set is empty".into()));
        }
        Ok(Self { priors, schedule })
    }
}

impl Policy for MleUcb {
    fn name(&self) -> &str {
        "mle"
    }

    fn choose(
        &mut self,
        t: u32,
        feasible: &[SpaceTimePoint],
        log: &ObservationLog,
        rng: &mut dyn RngCore,
    ) -> Result<Choice, PolicyError> {
        check_feasible(feasible)?;
        let betas: Vec<f64> = self
            .priors
            .iter()
            .map(|p| self.schedule.beta(p, t))
            .collect::<Result<_, _>>()?;
        let models = PosteriorModel::fit_many(&self.priors, log)?;
        let refs: Vec<&PosteriorModel> = models.iter().collect();
        let sel = if log.is_empty() {
            // Evidence is undefined at t = 1: draw the prior uniformly.
            let p = Uniform::from(0..self.priors.len()).sample(rng);
            let (point_index, ucb, mean, sigma) = ucb_argmax(refs[p], betas[p], feasible);
            SelectOutcome { point_index, prior_index: p, ucb, mean, sigma }
        } else {
            let evidence: Vec<f64> = models.iter().map(|m| m.log_evidence()).collect();
            mle_select(&evidence, &refs, &betas, feasible)?
        };
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

    fn record(&mut self, _t: u32, choice: &Choice, y: f64) -> Result<StepUpdate, PolicyError> {
        let eta = choice.model.as_ref().map(|m| y - m.mean);
        Ok(StepUpdate { eta, ..StepUpdate::default() })
    }
}

/// Fully Bayesian treatment of the unknown prior: acquisition is the
/// evidence-weighted average of the per-prior UCB surfaces.
///
/// The reported acting prior is the posterior mode over priors; it feeds
/// the selection histogram but plays no role in the acquisition.
pub struct FullyBayesianUcb {
    priors: Vec<GpPrior>,
    schedule: ConfidenceSchedule,
    log_hyperprior: Vec<f64>,
}

impl FullyBayesianUcb {
    /// `hyperprior` defaults to uniform when `None`; a supplied one must
    /// be non-negative with positive total mass.
    pub fn new(
        priors: Vec<GpPrior>,
        schedule: ConfidenceSchedule,
        hyperprior: Option<Vec<f64>>,
    ) -> Result<Self, PolicyError> {
        if priors.is_empty() {
            return Err(PolicyError::Parameter("candidate prior set is empty".into()));
        }
        let n = priors.len();
        let log_hyperprior = match hyperprior {
            None => vec![-(n as f64).ln(); n],
            Some(w) => {
                if w.len() != n {
                    return Err(PolicyError::Parameter(format!(
                        "hyperprior has {} weights for {} priors",
                        w.len(),
                        n
                    )));
                }
                if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(PolicyError::Parameter(
                        "hyperprior weights must be non-negative and finite".into(),
                    ));
                }
                let total: f64 = w.iter().sum();
                if !(total > 0.0) {
                    return Err(PolicyError::Parameter(
                        "hyperprior weights must have positive total mass".into(),
                    ));
                }
                w.iter().map(|v| (v / total).ln()).collect()
            }
        };
        Ok(Self { priors, schedule, log_hyperprior })
    }
}

impl Policy for FullyBayesianUcb {
    fn name(&self) -> &str {
        "fully-bayesian"
    }

    fn choose(
        &mut self,
        t: u32,
        feasible: &[SpaceTimePoint],
        log: &ObservationLog,
        _rng: &mut dyn RngCore,
    ) -> Result<Choice, PolicyError> {
        check_feasible(feasible)?;
        let betas: Vec<f64> = self
            .priors
            .iter()
            .map(|p| self.schedule.beta(p, t))
            .collect::<Result<_, _>>()?;
        let models = PosteriorModel::fit_many(&self.priors, log)?;
        let refs: Vec<&PosteriorModel> = models.iter().collect();
        let evidence: Vec<f64> = models.iter().map(|m| m.log_evidence()).collect();
        let weights = fully_bayesian_weights(&evidence, &self.log_hyperprior);
        let (point_index, acq) = fully_bayesian_select(&weights, &refs, &betas, feasible)?;

        let mut mode = 0usize;
        for (i, &w) in weights.iter().enumerate() {
            if w > weights[mode] {
                mode = i;
            }
        }
        let (mean, var) = models[mode].predict(&feasible[point_index]);
        Ok(Choice {
            point_index,
            point: feasible[point_index].clone(),
            model: Some(ChoiceModel {
                prior_index: mode,
                prior_id: self.priors[mode].id().to_string(),
                ucb: acq,
                mean,
                sigma: var.sqrt(),
                beta: betas[mode],
            }),
        })
    }

    fn record(&mut self, _t: u32, choice: &Choice, y: f64) -> Result<StepUpdate, PolicyError> {
        let eta = choice.model.as_ref().map(|m| y - m.mean);
        Ok(StepUpdate { eta, ..StepUpdate::default() })
    }
}

/// Uniform random choice over the feasible set.
pub struct RandomSearch;

impl Policy for RandomSearch {
    fn name(&self) -> &str {
        "random-search"
    }

    fn choose(
        &mut self,
        _t: u32,
        feasible: &[SpaceTimePoint],
        _log: &ObservationLog,
        rng: &mut dyn RngCore,
    ) -> Result<Choice, PolicyError> {
        check_feasible(feasible)?;
        let point_index = Uniform::from(0..feasible.len()).sample(rng);
        Ok(Choice { point_index, point: feasible[point_index].clone(), model: None })
    }

    fn record(&mut self, _t: u32, _choice: &Choice, _y: f64) -> Result<StepUpdate, PolicyError> {
        Ok(StepUpdate::default())
    }
}

/// GP-UCB with the true prior known; the oracle reference point.
pub struct KnownPriorUcb {
    prior: GpPrior,
    prior_index: usize,
    schedule: ConfidenceSchedule,
}

impl KnownPriorUcb {
    /// `prior_index` is the prior's position in the registered candidate
    /// list, kept so traces stay comparable across policies.
    pub fn new(prior: GpPrior, prior_index: usize, schedule: ConfidenceSchedule) -> Self {
        Self { prior, prior_index, schedule }
    }
}

impl Policy for KnownPriorUcb {
    fn name(&self) -> &str {
        "oracle-ucb"
    }

    fn choose(
        &mut self,
        t: u32,
        feasible: &[SpaceTimePoint],
        log: &ObservationLog,
        _rng: &mut dyn RngCore,
    ) -> Result<Choice, PolicyError> {
        check_feasible(feasible)?;
        let beta = self.schedule.beta(&self.prior, t)?;
        let model = PosteriorModel::fit(&self.prior, log)?;
        let (point_index, ucb, mean, sigma) = ucb_argmax(&model, beta, feasible);
        Ok(Choice {
            point_index,
            point: feasible[point_index].clone(),
            model: Some(ChoiceModel {
                prior_index: self.prior_index,
                prior_id: self.prior.id().to_string(),
                ucb,
                mean,
                sigma,
                beta,
            }),
        })
    }

    fn record(&mut self, _t: u32, choice: &Choice, y: f64) -> Result<StepUpdate, PolicyError> {
        let eta = choice.model.as_ref().map(|m| y - m.mean);
        Ok(StepUpdate { eta, ..StepUpdate::default() })
    }
}
