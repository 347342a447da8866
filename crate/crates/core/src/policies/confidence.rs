//! Confidence-radius and elimination-threshold schedules.

use std::f64::consts::PI;

use super::PolicyError;
use crate::gp::GpPrior;

fn check_positive(name: &str, v: f64) -> Result<(), PolicyError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(PolicyError::Parameter(format!(
            "{name} must be positive and finite, got {v}"
        )));
    }
    Ok(())
}

fn check_at_least_one(name: &str, v: f64) -> Result<(), PolicyError> {
    if !(v >= 1.0) || !v.is_finite() {
        return Err(PolicyError::Parameter(format!(
            "{name} must be at least 1, got {v}"
        )));
    }
    Ok(())
}

/// Confidence width for a finite domain of `domain_size` points:
/// `sqrt(2 log(T |X| pi^2 t^2 / (3 delta)))`.
///
/// Pure formula evaluator; arguments that are conceptually integers are
/// taken as reals so schedules and tests can probe the formula directly.
pub fn beta_finite(t: f64, domain_size: f64, horizon: f64, delta: f64) -> Result<f64, PolicyError> {
    check_at_least_one("t", t)?;
    check_at_least_one("domain_size", domain_size)?;
    check_at_least_one("horizon", horizon)?;
    check_positive("delta", delta)?;
    let arg = horizon * domain_size * PI * PI * t * t / (3.0 * delta);
    if arg < 1.0 {
        return Err(PolicyError::Parameter(format!(
            "delta {delta} too large: log argument {arg} below 1"
        )));
    }
    Ok((2.0 * arg.ln()).sqrt())
}

/// Confidence width for continuous domains `[0, side]^dim` under the
/// sample-path smoothness constants `(a, b)`:
/// `sqrt(2 log(pi^2 t^2 / (3 delta)) + 2 d log(T d t^2 r b sqrt(log(2 d a / delta))))`.
pub fn beta_continuous(
    t: f64,
    horizon: f64,
    delta: f64,
    dim: f64,
    side: f64,
    a: f64,
    b: f64,
) -> Result<f64, PolicyError> {
    check_at_least_one("t", t)?;
    check_at_least_one("horizon", horizon)?;
    check_positive("delta", delta)?;
    check_at_least_one("dim", dim)?;
    check_positive("side", side)?;
    check_positive("a", a)?;
    check_positive("b", b)?;
    let inner = (2.0 * dim * a / delta).ln();
    if inner <= 0.0 {
        return Err(PolicyError::Parameter(format!(
            "delta {delta} too large for smoothness constant a = {a}"
        )));
    }
    let first = 2.0 * (PI * PI * t * t / (3.0 * delta)).ln();
    let second = 2.0 * dim * (horizon * dim * t * t * side * b * inner.sqrt()).ln();
    let sum = first + second;
    if sum < 0.0 || !sum.is_finite() {
        return Err(PolicyError::Parameter(format!(
            "confidence radius undefined for the given constants (sum of log terms {sum})"
        )));
    }
    Ok(sum.sqrt())
}

/// Elimination-threshold scale `xi_t = 2 R^2 log(|U| pi^2 t^2 / (3 delta))`.
pub fn xi(t: f64, noise_std: f64, num_priors: f64, delta: f64) -> Result<f64, PolicyError> {
    check_at_least_one("t", t)?;
    check_positive("noise_std", noise_std)?;
    check_at_least_one("num_priors", num_priors)?;
    check_positive("delta", delta)?;
    let arg = num_priors * PI * PI * t * t / (3.0 * delta);
    if arg < 1.0 {
        return Err(PolicyError::Parameter(format!(
            "delta {delta} too large: log argument {arg} below 1"
        )));
    }
    Ok(2.0 * noise_std * noise_std * arg.ln())
}

/// Domain cardinality as seen by the confidence schedule.
#[derive(Clone, Debug, PartialEq)]
pub enum DomainCardinality {
    Finite(usize),
    /// Compact box `[0, side]^dim`.
    Continuous { dim: u32, side: f64 },
}

/// Validated per-run confidence parameters. `delta` is the total failure
/// probability; it is split evenly between the value bound (used by the
/// per-prior widths) and the noise bound (used by `xi`), which the closed
/// forms below absorb into their constants.
#[derive(Clone, Debug)]
pub struct ConfidenceSchedule {
    delta: f64,
    horizon: u32,
    domain: DomainCardinality,
}

impl ConfidenceSchedule {
    pub fn finite(domain_size: usize, horizon: u32, delta: f64) -> Result<Self, PolicyError> {
        if domain_size == 0 {
            return Err(PolicyError::Parameter("domain_size must be at least 1".into()));
        }
        Self::validate_common(horizon, delta)?;
        Ok(Self { delta, horizon, domain: DomainCardinality::Finite(domain_size) })
    }

    pub fn continuous(dim: u32, side: f64, horizon: u32, delta: f64) -> Result<Self, PolicyError> {
        if dim == 0 {
            return Err(PolicyError::Parameter("dim must be at least 1".into()));
        }
        check_positive("side", side)?;
        Self::validate_common(horizon, delta)?;
        Ok(Self { delta, horizon, domain: DomainCardinality::Continuous { dim, side } })
    }

    fn validate_common(horizon: u32, delta: f64) -> Result<(), PolicyError> {
        if horizon == 0 {
            return Err(PolicyError::Parameter("horizon must be at least 1".into()));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(PolicyError::Parameter(format!(
                "delta must lie in (0, 1), got {delta}"
            )));
        }
        Ok(())
    }

    /// Confidence width `beta_t^p` for one prior at step `t`.
    ///
    /// Continuous domains require the prior to carry smoothness constants
    /// and receive the half-delta share directly, matching the even split.
    pub fn beta(&self, prior: &GpPrior, t: u32) -> Result<f64, PolicyError> {
        let t = f64::from(t);
        let horizon = f64::from(self.horizon);
        match &self.domain {
            DomainCardinality::Finite(m) => beta_finite(t, *m as f64, horizon, self.delta),
            DomainCardinality::Continuous { dim, side } => {
                let s = prior.smoothness().ok_or_else(|| {
                    PolicyError::Parameter(format!(
                        "prior `{}` lacks smoothness constants required on continuous domains",
                        prior.id()
                    ))
                })?;
                beta_continuous(
                    t,
                    horizon,
                    self.delta / 2.0,
                    f64::from(*dim),
                    *side,
                    s.a,
                    s.b,
                )
            }
        }
    }

    /// Elimination-threshold scale at step `t` for a candidate set of
    /// `num_priors` priors and observation noise `noise_std`.
    pub fn xi(&self, noise_std: f64, num_priors: usize, t: u32) -> Result<f64, PolicyError> {
        xi(f64::from(t), noise_std, num_priors as f64, self.delta)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn domain(&self) -> &DomainCardinality {
        &self.domain
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    #[test]
    fn beta_finite_sqrt_two_when_argument_is_e() {
        // t = T = |X| = 1 and delta = pi^2/(3e) drive the log argument to e.
        let delta = PI * PI / (3.0 * E);
        let v = beta_finite(1.0, 1.0, 1.0, delta).unwrap();
        assert_relative_eq!(v, 2.0f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn beta_finite_monotone_in_t() {
        let a = beta_finite(1.0, 10.0, 100.0, 0.05).unwrap();
        let b = beta_finite(2.0, 10.0, 100.0, 0.05).unwrap();
        assert!(b > a);
    }

    #[test]
    fn beta_finite_pinned_value() {
        // sqrt(2 log(10^3 pi^2 / 0.15)) evaluated with 30-digit arithmetic.
        let v = beta_finite(1.0, 10.0, 100.0, 0.05).unwrap();
        assert_relative_eq!(v, 4.710_485_120_572_364, epsilon = 1e-14);
    }

    #[test]
    fn beta_finite_rejects_bad_parameters() {
        assert!(beta_finite(0.0, 1.0, 1.0, 0.1).is_err());
        assert!(beta_finite(1.0, 0.0, 1.0, 0.1).is_err());
        assert!(beta_finite(1.0, 1.0, 1.0, 0.0).is_err());
        assert!(beta_finite(1.0, 1.0, 1.0, -0.5).is_err());
        // delta so large the squared width would go negative
        assert!(beta_finite(1.0, 1.0, 1.0, 100.0).is_err());
    }

    #[test]
    fn beta_continuous_exact_two_when_each_log_term_is_one() {
        // Back-solve both log arguments to e: delta from the first term,
        // then the (fractional) horizon from the second.
        let delta = PI * PI / (3.0 * E);
        let horizon = E / (2.0f64 / delta).ln().sqrt();
        let v = beta_continuous(1.0, horizon, delta, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn beta_continuous_pinned_value() {
        // t=2, T=50, delta=0.1, d=1, r=1, a=b=1, via 30-digit arithmetic.
        let v = beta_continuous(2.0, 50.0, 0.1, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(v, 4.631_768_270_083_282, epsilon = 1e-14);
    }

    #[test]
    fn beta_continuous_increasing_in_t() {
        let mut last = 0.0;
        for t in 1..=20 {
            let v = beta_continuous(f64::from(t), 100.0, 0.05, 1.0, 1.0, 1.0, 1.0).unwrap();
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn beta_continuous_finite_over_grid() {
        for &delta in &[0.01, 0.1] {
            let mut t = 1.0;
            while t <= 1e4 {
                let v = beta_continuous(t, 1e4, delta, 1.0, 1.0, 1.0, 1.0).unwrap();
                assert!(v.is_finite(), "t={t} delta={delta}");
                t *= 3.0;
            }
            let v = beta_continuous(1e4, 1e4, delta, 1.0, 1.0, 1.0, 1.0).unwrap();
            assert!(v.is_finite());
        }
    }

    #[test]
    fn beta_continuous_rejects_bad_parameters() {
        assert!(beta_continuous(1.0, 10.0, 0.1, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(beta_continuous(1.0, 10.0, 0.1, 1.0, -1.0, 1.0, 1.0).is_err());
        assert!(beta_continuous(1.0, 10.0, 0.1, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(beta_continuous(1.0, 10.0, 0.1, 1.0, 1.0, 1.0, 0.0).is_err());
        // inner log argument 2da/delta <= 1
        assert!(beta_continuous(1.0, 10.0, 3.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn xi_is_two_when_argument_is_e() {
        let delta = PI * PI / (3.0 * E);
        let v = xi(1.0, 1.0, 1.0, delta).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn xi_quadruples_with_doubled_noise() {
        let a = xi(3.0, 0.2, 5.0, 0.1).unwrap();
        let b = xi(3.0, 0.4, 5.0, 0.1).unwrap();
        assert_relative_eq!(b, 4.0 * a, epsilon = 1e-12);
    }

    #[test]
    fn xi_pinned_value() {
        // 0.02 * log(11 pi^2 / 0.3) evaluated with 30-digit arithmetic.
        let v = xi(1.0, 0.1, 11.0, 0.1).unwrap();
        assert_relative_eq!(v, 0.117_826_556_976_462_14, epsilon = 1e-14);
    }

    #[test]
    fn xi_increasing_in_t() {
        let a = xi(1.0, 0.1, 3.0, 0.05).unwrap();
        let b = xi(2.0, 0.1, 3.0, 0.05).unwrap();
        assert!(b > a);
    }

    #[test]
    fn schedule_validates_delta_strictly() {
        assert!(ConfidenceSchedule::finite(10, 100, 0.0).is_err());
        assert!(ConfidenceSchedule::finite(10, 100, 1.0).is_err());
        assert!(ConfidenceSchedule::finite(10, 100, 1.2).is_err());
        assert!(ConfidenceSchedule::finite(0, 100, 0.1).is_err());
        assert!(ConfidenceSchedule::finite(10, 0, 0.1).is_err());
        assert!(ConfidenceSchedule::finite(10, 100, 0.1).is_ok());
    }

    #[test]
    fn continuous_schedule_requires_smoothness() {
        use crate::gp::{GpPrior, Kernel, TvRbfKernel};
        use std::sync::Arc;
        let kernel: Arc<dyn Kernel> = Arc::new(TvRbfKernel::new(1.0, 0.0).unwrap());
        let bare = GpPrior::new("bare", |_| 0.0, Arc::clone(&kernel));
        let sched = ConfidenceSchedule::continuous(1, 1.0, 100, 0.1).unwrap();
        assert!(sched.beta(&bare, 1).is_err());
        let with = GpPrior::new("ok", |_| 0.0, kernel).with_smoothness(1.0, 1.0);
        let beta = sched.beta(&with, 1).unwrap();
        assert!(beta.is_finite() && beta > 0.0);
    }

    #[test]
    fn finite_schedule_beta_matches_formula() {
        use crate::gp::{GpPrior, Kernel, TvRbfKernel};
        use std::sync::Arc;
        let kernel: Arc<dyn Kernel> = Arc::new(TvRbfKernel::new(1.0, 0.0).unwrap());
        let prior = GpPrior::new("p", |_| 0.0, kernel);
        let sched = ConfidenceSchedule::finite(10, 100, 0.05).unwrap();
        assert_eq!(
            sched.beta(&prior, 1).unwrap(),
            beta_finite(1.0, 10.0, 100.0, 0.05).unwrap()
        );
        assert_eq!(
            sched.xi(0.1, 11, 1).unwrap(),
            xi(1.0, 0.1, 11.0, 0.05).unwrap()
        );
    }
}
