//! Spatio-temporal Gaussian-process machinery: kernels, exact posterior
//! inference, marginal likelihood and information-gain diagnostics.

mod kernel;
mod log;
mod posterior;
mod prior;

pub use kernel::{tv_rbf_kernel, CovTableKernel, Kernel, TvRbfKernel};
pub use log::ObservationLog;
pub use posterior::{
    fit_posterior, information_gain, log_marginal_likelihood, predict_group, FitOptions,
    PosteriorModel,
};
pub(crate) use posterior::cholesky_with_jitter;
pub use prior::{GpPrior, SmoothnessConstants};

/// Errors from the GP layer.
#[derive(Debug, thiserror::Error)]
pub enum GpError {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Cholesky factorization still failed after escalating the diagonal
    /// jitter to its ceiling.
    #[error("Gram factorization failed for prior `{prior_id}` (jitter escalated to {jitter:e})")]
    Factorization { prior_id: String, jitter: f64 },

    /// A kernel variance above 1 was observed at an evaluated point.
    /// Rescale the kernel so that k(z, z) <= 1, or disable the check via
    /// [`FitOptions`].
    #[error("kernel of prior `{prior_id}` violates the unit bound: k(z, z) = {value}")]
    UnitBoundViolated { prior_id: String, value: f64 },

    #[error("observation timesteps must be strictly increasing: got t={next} after t={prev}")]
    NonIncreasingTimestep { prev: u32, next: u32 },

    #[error("operation requires a non-empty point list")]
    EmptyPoints,
}
