//! Exact GP posterior inference over a factorized Gram matrix.

use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::{GpError, GpPrior, Kernel, ObservationLog};
use crate::point::SpaceTimePoint;

const JITTER_START: f64 = 1e-10;
const JITTER_CEIL: f64 = 1e-4;
const UNIT_BOUND_TOL: f64 = 1e-8;

/// Fit-time validation knobs.
#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    /// Reject kernels with `k(z, z) > 1` at any conditioning point.
    /// The confidence machinery assumes unit-normalised kernels, so this
    /// defaults to on; kernels are never rescaled silently.
    pub enforce_unit_bound: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { enforce_unit_bound: true }
    }
}

/// Cholesky factor of `K + R^2 I (+ jitter I)` over one conditioning set,
/// shared between all priors built on the same kernel object.
struct GramFactor {
    chol: Cholesky<f64, Dyn>,
    train: Vec<SpaceTimePoint>,
    kernel: Arc<dyn Kernel>,
    jitter: f64,
    half_log_det: f64,
}

pub(crate) fn cholesky_with_jitter(
    base: &DMatrix<f64>,
    prior_id: &str,
) -> Result<(Cholesky<f64, Dyn>, f64), GpError> {
    let mut jitter = JITTER_START;
    loop {
        let mut m = base.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(m) {
            return Ok((chol, jitter));
        }
        if jitter >= JITTER_CEIL {
            return Err(GpError::Factorization {
                prior_id: prior_id.to_string(),
                jitter: JITTER_CEIL,
            });
        }
        jitter *= 10.0;
    }
}

/// In-place solve of `L v = b` using only the lower triangle of `l`.
fn forward_solve(l: &DMatrix<f64>, b: &mut DVector<f64>) {
    let n = l.nrows();
    for j in 0..n {
        b[j] /= l[(j, j)];
        let bj = b[j];
        for i in (j + 1)..n {
            b[i] -= l[(i, j)] * bj;
        }
    }
}

impl GramFactor {
    fn build(
        kernel: &Arc<dyn Kernel>,
        train: Vec<SpaceTimePoint>,
        noise_var: f64,
        owner_id: &str,
        options: FitOptions,
    ) -> Result<Arc<Self>, GpError> {
        let n = train.len();
        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            let kii = kernel.eval(&train[i], &train[i]);
            if !kii.is_finite() {
                return Err(GpError::Parameter(format!(
                    "kernel of prior `{owner_id}` is not finite at a training point"
                )));
            }
            if options.enforce_unit_bound && kii > 1.0 + UNIT_BOUND_TOL {
                return Err(GpError::UnitBoundViolated {
                    prior_id: owner_id.to_string(),
                    value: kii,
                });
            }
            gram[(i, i)] = kii + noise_var;
            for j in 0..i {
                let v = kernel.eval(&train[i], &train[j]);
                if !v.is_finite() {
                    return Err(GpError::Parameter(format!(
                        "kernel of prior `{owner_id}` is not finite at a training pair"
                    )));
                }
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let (chol, jitter) = cholesky_with_jitter(&gram, owner_id)?;
        let half_log_det = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
        Ok(Arc::new(Self {
            chol,
            train,
            kernel: Arc::clone(kernel),
            jitter,
            half_log_det,
        }))
    }

    fn kvec(&self, query: &SpaceTimePoint) -> DVector<f64> {
        DVector::from_iterator(
            self.train.len(),
            self.train.iter().map(|p| self.kernel.eval(query, p)),
        )
    }

    /// `|| L^{-1} k ||^2`, the variance reduction at a query.
    fn solve_norm_sq(&self, kvec: &DVector<f64>) -> f64 {
        let mut v = kvec.clone();
        forward_solve(self.chol.l_dirty(), &mut v);
        v.norm_squared()
    }
}

/// Immutable fitted GP: shared Gram factor plus per-prior residual weights.
/// Safe to query from multiple threads.
pub struct PosteriorModel {
    prior: GpPrior,
    factor: Option<Arc<GramFactor>>,
    weights: DVector<f64>,
    log_evidence: f64,
    noise_var: f64,
}

impl std::fmt::Debug for PosteriorModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PosteriorModel")
            .field("prior", &self.prior)
            .field("n", &self.num_observations())
            .field("jitter", &self.jitter())
            .finish_non_exhaustive()
    }
}

impl PosteriorModel {
    pub fn fit(prior: &GpPrior, log: &ObservationLog) -> Result<Self, GpError> {
        Self::fit_with_options(prior, log, FitOptions::default())
    }

    pub fn fit_with_options(
        prior: &GpPrior,
        log: &ObservationLog,
        options: FitOptions,
    ) -> Result<Self, GpError> {
        let mut fitted = Self::fit_many_with_options(std::slice::from_ref(prior), log, options)?;
        Ok(fitted.pop().expect("one prior in, one model out"))
    }

    /// Fit several priors on one log. Priors sharing a kernel object share
    /// one Gram factorization; only the residual solve is per-prior.
    pub fn fit_many(priors: &[GpPrior], log: &ObservationLog) -> Result<Vec<Self>, GpError> {
        Self::fit_many_with_options(priors, log, FitOptions::default())
    }

    pub fn fit_many_with_options(
        priors: &[GpPrior],
        log: &ObservationLog,
        options: FitOptions,
    ) -> Result<Vec<Self>, GpError> {
        let n = log.len();
        let noise_var = log.noise_std() * log.noise_std();
        if n == 0 {
            return Ok(priors
                .iter()
                .map(|p| Self {
                    prior: p.clone(),
                    factor: None,
                    weights: DVector::zeros(0),
                    log_evidence: 0.0,
                    noise_var,
                })
                .collect());
        }
        let train: Vec<SpaceTimePoint> = log.points().cloned().collect();
        let y = DVector::from_iterator(n, log.values());
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();

        let mut factors: Vec<(usize, Arc<GramFactor>)> = Vec::new();
        let mut out = Vec::with_capacity(priors.len());
        for (idx, prior) in priors.iter().enumerate() {
            let factor = match factors
                .iter()
                .find(|(first, _)| priors[*first].shares_kernel(prior))
            {
                Some((_, f)) => Arc::clone(f),
                None => {
                    let f = GramFactor::build(
                        prior.kernel(),
                        train.clone(),
                        noise_var,
                        prior.id(),
                        options,
                    )?;
                    factors.push((idx, Arc::clone(&f)));
                    f
                }
            };
            let mu = DVector::from_iterator(n, train.iter().map(|p| prior.mean_at(p)));
            if mu.iter().any(|v| !v.is_finite()) {
                return Err(GpError::Parameter(format!(
                    "mean of prior `{}` is not finite at a training point",
                    prior.id()
                )));
            }
            let residual = &y - &mu;
            let weights = factor.chol.solve(&residual);
            let log_evidence = -0.5 * residual.dot(&weights)
                - factor.half_log_det
                - 0.5 * n as f64 * ln_2pi;
            out.push(Self {
                prior: prior.clone(),
                factor: Some(factor),
                weights,
                log_evidence,
                noise_var,
            });
        }
        Ok(out)
    }

    /// Posterior mean and variance at a query point. The variance is
    /// clamped to `[0, k(z, z)]` on output.
    pub fn predict(&self, query: &SpaceTimePoint) -> (f64, f64) {
        let prior_var = self.prior.kernel_eval(query, query).max(0.0);
        match &self.factor {
            None => (self.prior.mean_at(query), prior_var),
            Some(f) => {
                let kvec = f.kvec(query);
                let mean = self.prior.mean_at(query) + kvec.dot(&self.weights);
                let var = prior_var - f.solve_norm_sq(&kvec);
                (mean, var.clamp(0.0, prior_var))
            }
        }
    }

    pub fn prior(&self) -> &GpPrior {
        &self.prior
    }

    pub fn num_observations(&self) -> usize {
        self.factor.as_ref().map_or(0, |f| f.train.len())
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_var.sqrt()
    }

    /// Diagonal jitter the factorization needed (0 for an empty log).
    pub fn jitter(&self) -> f64 {
        self.factor.as_ref().map_or(0.0, |f| f.jitter)
    }

    /// Log marginal likelihood of the conditioning data under this prior;
    /// 0 by convention for an empty log.
    pub fn log_evidence(&self) -> f64 {
        self.log_evidence
    }

    /// Whether two fitted models share one Gram factorization.
    pub fn shares_factor(&self, other: &PosteriorModel) -> bool {
        match (&self.factor, &other.factor) {
            (Some(a), Some(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// `fit_posterior` spelled as a free function.
pub fn fit_posterior(prior: &GpPrior, log: &ObservationLog) -> Result<PosteriorModel, GpError> {
    PosteriorModel::fit(prior, log)
}

/// Predict under several models at one query, computing the expensive
/// triangular solve only once per distinct Gram factor.
pub fn predict_group(models: &[&PosteriorModel], query: &SpaceTimePoint) -> Vec<(f64, f64)> {
    let mut cache: Vec<(*const GramFactor, DVector<f64>, f64)> = Vec::new();
    models
        .iter()
        .map(|m| {
            let prior_var = m.prior.kernel_eval(query, query).max(0.0);
            match &m.factor {
                None => (m.prior.mean_at(query), prior_var),
                Some(f) => {
                    let key = Arc::as_ptr(f);
                    let idx = cache.iter().position(|(k, _, _)| *k == key).unwrap_or_else(|| {
                        let kvec = f.kvec(query);
                        let norm_sq = f.solve_norm_sq(&kvec);
                        cache.push((key, kvec, norm_sq));
                        cache.len() - 1
                    });
                    let (_, kvec, norm_sq) = &cache[idx];
                    let mean = m.prior.mean_at(query) + kvec.dot(&m.weights);
                    let var = prior_var - norm_sq;
                    (mean, var.clamp(0.0, prior_var))
                }
            }
        })
        .collect()
}

/// Log marginal likelihood `log N(y; mu_p, K_p + R^2 I)` of the log under
/// a prior; 0 by convention when the log is empty.
pub fn log_marginal_likelihood(prior: &GpPrior, log: &ObservationLog) -> Result<f64, GpError> {
    Ok(PosteriorModel::fit(prior, log)?.log_evidence())
}

/// Information gain `1/2 log det(I + R^{-2} K)` of a point set under a
/// prior's kernel.
pub fn information_gain(
    prior: &GpPrior,
    points: &[SpaceTimePoint],
    noise_std: f64,
) -> Result<f64, GpError> {
    if points.is_empty() {
        return Err(GpError::EmptyPoints);
    }
    if !(noise_std > 0.0) || !noise_std.is_finite() {
        return Err(GpError::Parameter(format!(
            "noise_std must be positive and finite, got {noise_std}"
        )));
    }
    let n = points.len();
    let inv_noise_var = 1.0 / (noise_std * noise_std);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = 1.0 + inv_noise_var * prior.kernel_eval(&points[i], &points[i]);
        for j in 0..i {
            let v = inv_noise_var * prior.kernel_eval(&points[i], &points[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    let (chol, _) = cholesky_with_jitter(&m, prior.id())?;
    let gain: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
    Ok(gain.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::kernel::{CovTableKernel, TvRbfKernel};
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rbf_prior(id: &str, lengthscale: f64, forgetting: f64) -> GpPrior {
        let kernel: Arc<dyn Kernel> =
            Arc::new(TvRbfKernel::new(lengthscale, forgetting).unwrap());
        GpPrior::new(id, |_| 0.0, kernel)
    }

    /// Gauss-Jordan inverse with partial pivoting; the independent
    /// direct-inversion route used as an oracle.
    fn gauss_jordan_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = m.nrows();
        let mut a = m.clone();
        let mut inv = DMatrix::identity(n, n);
        for col in 0..n {
            let mut piv = col;
            for r in (col + 1)..n {
                if a[(r, col)].abs() > a[(piv, col)].abs() {
                    piv = r;
                }
            }
            if piv != col {
                a.swap_rows(col, piv);
                inv.swap_rows(col, piv);
            }
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= d;
                inv[(col, j)] /= d;
            }
            for r in 0..n {
                if r != col {
                    let f = a[(r, col)];
                    if f != 0.0 {
                        for j in 0..n {
                            a[(r, j)] -= f * a[(col, j)];
                            inv[(r, j)] -= f * inv[(col, j)];
                        }
                    }
                }
            }
        }
        inv
    }

    /// Posterior mean/variance via the explicit inverse formulas.
    fn oracle_predict(
        prior: &GpPrior,
        log: &ObservationLog,
        jitter: f64,
        query: &SpaceTimePoint,
    ) -> (f64, f64) {
        let n = log.len();
        let pts: Vec<_> = log.points().cloned().collect();
        let mut gram = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] = prior.kernel_eval(&pts[i], &pts[j]);
            }
            gram[(i, i)] += log.noise_std() * log.noise_std() + jitter;
        }
        let inv = gauss_jordan_inverse(&gram);
        let kvec = DVector::from_iterator(n, pts.iter().map(|p| prior.kernel_eval(query, p)));
        let resid =
            DVector::from_iterator(n, log.entries().iter().map(|(p, y)| y - prior.mean_at(p)));
        let mean = prior.mean_at(query) + kvec.dot(&(&inv * &resid));
        let var = prior.kernel_eval(query, query) - kvec.dot(&(&inv * &kvec));
        (mean, var)
    }

    #[test]
    fn empty_log_returns_prior() {
        let prior = rbf_prior("p", 0.5, 0.1);
        let log = ObservationLog::new(1.0).unwrap();
        let model = PosteriorModel::fit(&prior, &log).unwrap();
        let q = SpaceTimePoint::coord1(0.3, 4);
        let (mean, var) = model.predict(&q);
        assert_eq!(mean, 0.0);
        assert_eq!(var, prior.kernel_eval(&q, &q));
        assert_eq!(model.log_evidence(), 0.0);
    }

    #[test]
    fn single_observation_closed_form() {
        // k = 1 between train and query, R = 1, mu = 0, y = 2:
        // mean = 2 / (1 + 1) = 1, var = 1 - 1/2 = 0.5.
        let prior = rbf_prior("p", 0.5, 0.0);
        let mut log = ObservationLog::new(1.0).unwrap();
        log.push(SpaceTimePoint::coord1(0.4, 1), 2.0).unwrap();
        let model = PosteriorModel::fit(&prior, &log).unwrap();
        let (mean, var) = model.predict(&SpaceTimePoint::coord1(0.4, 1));
        assert_relative_eq!(mean, 1.0, epsilon = 1e-9);
        assert_relative_eq!(var, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn matches_direct_inversion_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let n = rng.gen_range(1..=20);
            let lengthscale = rng.gen_range(0.05..2.0);
            let forgetting = rng.gen_range(0.0..0.5);
            let noise = rng.gen_range(0.1..1.0);
            let prior = rbf_prior("p", lengthscale, forgetting);
            let mut log = ObservationLog::new(noise).unwrap();
            for t in 1..=n {
                log.push(
                    SpaceTimePoint::coord1(rng.gen_range(0.0..1.0), t as u32),
                    rng.gen_range(-2.0..2.0),
                )
                .unwrap();
            }
            let model = PosteriorModel::fit(&prior, &log).unwrap();
            for _ in 0..5 {
                let q = SpaceTimePoint::coord1(
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(1..=(n as u32 + 2)),
                );
                let (mean, var) = model.predict(&q);
                let (omean, ovar) = oracle_predict(&prior, &log, model.jitter(), &q);
                assert!((mean - omean).abs() < 1e-8, "mean {mean} vs {omean}");
                assert!((var - ovar.max(0.0)).abs() < 1e-8, "var {var} vs {ovar}");
            }
        }
    }

    #[test]
    fn near_interpolation_with_tiny_noise() {
        let prior = rbf_prior("p", 0.5, 0.0);
        let mut log = ObservationLog::new(1e-6).unwrap();
        log.push(SpaceTimePoint::coord1(0.7, 1), -1.3).unwrap();
        let model = PosteriorModel::fit(&prior, &log).unwrap();
        let (mean, _) = model.predict(&SpaceTimePoint::coord1(0.7, 1));
        assert!((mean - (-1.3)).abs() < 1e-3);
    }

    #[test]
    fn conditioning_never_increases_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let prior = rbf_prior("p", rng.gen_range(0.05..1.0), 0.1);
            let noise = rng.gen_range(0.1..1.0);
            let n = rng.gen_range(2..=10);
            let mut entries = Vec::new();
            for t in 1..=n {
                entries.push((
                    SpaceTimePoint::coord1(rng.gen_range(0.0..1.0), t as u32),
                    rng.gen_range(-1.0..1.0),
                ));
            }
            let k = rng.gen_range(1..n);
            let small =
                ObservationLog::from_entries(entries[..k].to_vec(), noise).unwrap();
            let large = ObservationLog::from_entries(entries, noise).unwrap();
            let m_small = PosteriorModel::fit(&prior, &small).unwrap();
            let m_large = PosteriorModel::fit(&prior, &large).unwrap();
            for _ in 0..10 {
                let q = SpaceTimePoint::coord1(rng.gen_range(0.0..1.0), 1);
                assert!(m_large.predict(&q).1 <= m_small.predict(&q).1 + 1e-9);
            }
        }
    }

    #[test]
    fn observing_the_query_point_shrinks_its_variance() {
        let prior = rbf_prior("p", 0.3, 0.0);
        let q = SpaceTimePoint::coord1(0.25, 2);
        let before = ObservationLog::from_entries(
            vec![(SpaceTimePoint::coord1(0.9, 1), 0.4)],
            0.2,
        )
        .unwrap();
        let after = ObservationLog::from_entries(
            vec![
                (SpaceTimePoint::coord1(0.9, 1), 0.4),
                (SpaceTimePoint::coord1(0.25, 2), 0.1),
            ],
            0.2,
        )
        .unwrap();
        let v_before = PosteriorModel::fit(&prior, &before).unwrap().predict(&q).1;
        let v_after = PosteriorModel::fit(&prior, &after).unwrap().predict(&q).1;
        assert!(v_after <= v_before + 1e-9);
    }

    #[test]
    fn deterministic_fit() {
        let prior = rbf_prior("p", 0.4, 0.2);
        let log = ObservationLog::from_entries(
            vec![
                (SpaceTimePoint::coord1(0.1, 1), 0.7),
                (SpaceTimePoint::coord1(0.6, 2), -0.2),
            ],
            0.3,
        )
        .unwrap();
        let a = PosteriorModel::fit(&prior, &log).unwrap();
        let b = PosteriorModel::fit(&prior, &log).unwrap();
        let q = SpaceTimePoint::coord1(0.33, 3);
        assert_eq!(a.predict(&q), b.predict(&q));
        assert_eq!(a.log_evidence(), b.log_evidence());
    }

    #[test]
    fn factorization_failure_names_the_prior() {
        // Eigenvalues 3 and -1: indefinite, beyond any admissible jitter.
        let table = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let kernel: Arc<dyn Kernel> = Arc::new(CovTableKernel::new(table, 0.0).unwrap());
        let prior = GpPrior::new("bad-prior", |_| 0.0, kernel);
        let log = ObservationLog::from_entries(
            vec![
                (SpaceTimePoint::arm(0, 1), 0.0),
                (SpaceTimePoint::arm(1, 2), 0.0),
            ],
            0.05,
        )
        .unwrap();
        match PosteriorModel::fit(&prior, &log) {
            Err(GpError::Factorization { prior_id, .. }) => assert_eq!(prior_id, "bad-prior"),
            other => panic!("expected factorization error, got {other:?}"),
        }
    }

    #[test]
    fn unit_bound_is_enforced_by_default() {
        let table = DMatrix::from_row_slice(1, 1, &[2.0]);
        let kernel: Arc<dyn Kernel> = Arc::new(CovTableKernel::new(table, 0.0).unwrap());
        let prior = GpPrior::new("scaled", |_| 0.0, kernel);
        let log = ObservationLog::from_entries(vec![(SpaceTimePoint::arm(0, 1), 1.0)], 0.5)
            .unwrap();
        assert!(matches!(
            PosteriorModel::fit(&prior, &log),
            Err(GpError::UnitBoundViolated { .. })
        ));
        let opts = FitOptions { enforce_unit_bound: false };
        assert!(PosteriorModel::fit_with_options(&prior, &log, opts).is_ok());
    }

    #[test]
    fn shared_kernel_shares_factor_and_agrees_with_solo_fit() {
        let kernel: Arc<dyn Kernel> = Arc::new(TvRbfKernel::new(0.5, 0.1).unwrap());
        let a = GpPrior::new("a", |_| 0.0, Arc::clone(&kernel));
        let b = GpPrior::new("b", |z| z.t as f64 * 0.1, Arc::clone(&kernel));
        let log = ObservationLog::from_entries(
            vec![
                (SpaceTimePoint::coord1(0.2, 1), 0.5),
                (SpaceTimePoint::coord1(0.8, 2), 1.5),
            ],
            0.3,
        )
        .unwrap();
        let many = PosteriorModel::fit_many(&[a.clone(), b.clone()], &log).unwrap();
        assert!(many[0].shares_factor(&many[1]));
        let solo_b = PosteriorModel::fit(&b, &log).unwrap();
        let q = SpaceTimePoint::coord1(0.4, 3);
        assert_eq!(many[1].predict(&q), solo_b.predict(&q));
        let grouped = predict_group(&[&many[0], &many[1]], &q);
        assert_eq!(grouped[0], many[0].predict(&q));
        assert_eq!(grouped[1], many[1].predict(&q));
    }

    #[test]
    fn lml_empty_log_is_zero() {
        let prior = rbf_prior("p", 0.5, 0.0);
        let log = ObservationLog::new(1.0).unwrap();
        assert_eq!(log_marginal_likelihood(&prior, &log).unwrap(), 0.0);
    }

    #[test]
    fn lml_single_observation_scalar_gaussian() {
        // log N(0; 0, 1 + 1) = -0.5 ln(4 pi)
        let prior = rbf_prior("p", 0.5, 0.0);
        let log = ObservationLog::from_entries(
            vec![(SpaceTimePoint::coord1(0.3, 1), 0.0)],
            1.0,
        )
        .unwrap();
        let expected = -0.5 * (4.0 * std::f64::consts::PI).ln();
        assert_relative_eq!(
            log_marginal_likelihood(&prior, &log).unwrap(),
            expected,
            epsilon = 1e-9
        );
    }

    #[test]
    fn lml_equals_chain_rule_of_one_step_predictives() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let prior = rbf_prior("p", 0.4, 0.15);
        let noise = 0.5;
        let mut entries = Vec::new();
        for t in 1..=5u32 {
            entries.push((
                SpaceTimePoint::coord1(rng.gen_range(0.0..1.0), t),
                rng.gen_range(-1.0..1.0),
            ));
        }
        let full = ObservationLog::from_entries(entries.clone(), noise).unwrap();
        let lml = log_marginal_likelihood(&prior, &full).unwrap();

        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        let mut chain = 0.0;
        for i in 0..entries.len() {
            let head = ObservationLog::from_entries(entries[..i].to_vec(), noise).unwrap();
            let model = PosteriorModel::fit(&prior, &head).unwrap();
            let (mean, var) = model.predict(&entries[i].0);
            let pred_var = var + noise * noise;
            let resid = entries[i].1 - mean;
            chain += -0.5 * (resid * resid / pred_var + pred_var.ln() + ln_2pi);
        }
        assert!((lml - chain).abs() < 1e-8, "{lml} vs {chain}");
    }

    /// Determinant by Gaussian elimination, for the information-gain oracle.
    fn det_by_elimination(m: &DMatrix<f64>) -> f64 {
        let n = m.nrows();
        let mut a = m.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut piv = col;
            for r in (col + 1)..n {
                if a[(r, col)].abs() > a[(piv, col)].abs() {
                    piv = r;
                }
            }
            if piv != col {
                a.swap_rows(col, piv);
                det = -det;
            }
            let d = a[(col, col)];
            det *= d;
            if d == 0.0 {
                return 0.0;
            }
            for r in (col + 1)..n {
                let f = a[(r, col)] / d;
                for j in col..n {
                    a[(r, j)] -= f * a[(col, j)];
                }
            }
        }
        det
    }

    #[test]
    fn information_gain_single_point() {
        let prior = rbf_prior("p", 0.5, 0.0);
        let gain = information_gain(&prior, &[SpaceTimePoint::coord1(0.5, 1)], 1.0).unwrap();
        assert_relative_eq!(gain, 0.5 * 2.0f64.ln(), epsilon = 1e-9);
    }

    #[test]
    fn information_gain_is_submodular_on_duplicates() {
        let prior = rbf_prior("p", 0.5, 0.0);
        let p = SpaceTimePoint::coord1(0.5, 1);
        let one = information_gain(&prior, &[p.clone()], 0.7).unwrap();
        let two = information_gain(&prior, &[p.clone(), p], 0.7).unwrap();
        assert!(two > one);
        assert!(two - one < one);
    }

    #[test]
    fn information_gain_matches_determinant_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let prior = rbf_prior("p", 0.3, 0.2);
        let noise = 0.6;
        let points: Vec<_> = (1..=8u32)
            .map(|t| SpaceTimePoint::coord1(rng.gen_range(0.0..1.0), t))
            .collect();
        let n = points.len();
        let mut m = DMatrix::identity(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += prior.kernel_eval(&points[i], &points[j]) / (noise * noise);
            }
        }
        let expected = 0.5 * det_by_elimination(&m).ln();
        let gain = information_gain(&prior, &points, noise).unwrap();
        assert!((gain - expected).abs() < 1e-8, "{gain} vs {expected}");
    }

    #[test]
    fn information_gain_monotone_under_append() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let prior = rbf_prior("p", 0.4, 0.1);
        let points: Vec<_> = (1..=10u32)
            .map(|t| SpaceTimePoint::coord1(rng.gen_range(0.0..1.0), t))
            .collect();
        let mut last = 0.0;
        for k in 1..=points.len() {
            let gain = information_gain(&prior, &points[..k], 0.5).unwrap();
            assert!(gain >= last - 1e-12);
            last = gain;
        }
    }

    #[test]
    fn information_gain_rejects_empty_and_bad_noise() {
        let prior = rbf_prior("p", 0.5, 0.0);
        assert!(matches!(
            information_gain(&prior, &[], 1.0),
            Err(GpError::EmptyPoints)
        ));
        assert!(information_gain(&prior, &[SpaceTimePoint::coord1(0.0, 1)], 0.0).is_err());
    }
}
