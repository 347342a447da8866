//! Candidate GP priors.

use std::fmt;
use std::sync::Arc;

use super::kernel::Kernel;
use crate::point::{Location, SpaceTimePoint};

/// Mean function of a prior, evaluated at arbitrary `(x, t)` pairs.
pub type MeanFn = dyn Fn(&SpaceTimePoint) -> f64 + Send + Sync;

/// Tail-bound constants `(a, b)` on the derivatives of a sample path,
/// required by the continuous-domain confidence radius.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothnessConstants {
    pub a: f64,
    pub b: f64,
}

/// A named candidate prior: a spatio-temporal mean function plus kernel.
///
/// Cloning is cheap; the mean closure and kernel are shared. Priors built
/// from the same `Arc<dyn Kernel>` share Gram factorizations when fitted
/// together.
#[derive(Clone)]
pub struct GpPrior {
    id: String,
    mean: Arc<MeanFn>,
    kernel: Arc<dyn Kernel>,
    smoothness: Option<SmoothnessConstants>,
}

impl GpPrior {
    pub fn new<F>(id: impl Into<String>, mean: F, kernel: Arc<dyn Kernel>) -> Self
    where
        F: Fn(&SpaceTimePoint) -> f64 + Send + Sync + 'static,
    {
        Self {
            id: id.into(),
            mean: Arc::new(mean),
            kernel,
            smoothness: None,
        }
    }

    /// Finite-domain prior whose mean is a per-arm table.
    pub fn from_arm_means(
        id: impl Into<String>,
        means: Vec<f64>,
        kernel: Arc<dyn Kernel>,
    ) -> Self {
        Self::new(
            id,
            move |z: &SpaceTimePoint| match &z.x {
                Location::Arm(i) => means[*i],
                Location::Coords(_) => panic!("arm-table mean evaluated at coordinates"),
            },
            kernel,
        )
    }

    pub fn with_smoothness(mut self, a: f64, b: f64) -> Self {
        self.smoothness = Some(SmoothnessConstants { a, b });
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn mean_at(&self, z: &SpaceTimePoint) -> f64 {
        (self.mean)(z)
    }

    pub fn kernel(&self) -> &Arc<dyn Kernel> {
        &self.kernel
    }

    pub fn kernel_eval(&self, a: &SpaceTimePoint, b: &SpaceTimePoint) -> f64 {
        self.kernel.eval(a, b)
    }

    pub fn smoothness(&self) -> Option<SmoothnessConstants> {
        self.smoothness
    }

    /// Whether two priors share one kernel object (and hence one Gram
    /// matrix on any conditioning set).
    pub fn shares_kernel(&self, other: &GpPrior) -> bool {
        Arc::ptr_eq(&self.kernel, &other.kernel)
    }
}

impl fmt::Debug for GpPrior {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GpPrior")
            .field("id", &self.id)
            .field("smoothness", &self.smoothness)
            .finish_non_exhaustive()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::kernel::TvRbfKernel;

    #[test]
    fn arm_table_mean_indexes_table() {
        let kernel: Arc<dyn Kernel> = Arc::new(TvRbfKernel::new(1.0, 0.0).unwrap());
        let prior = GpPrior::from_arm_means("p", vec![1.0, -2.5], kernel);
        assert_eq!(prior.mean_at(&SpaceTimePoint::arm(1, 3)), -2.5);
    }

    #[test]
    fn kernel_sharing_is_by_identity() {
        let kernel: Arc<dyn Kernel> = Arc::new(TvRbfKernel::new(1.0, 0.0).unwrap());
        let other: Arc<dyn Kernel> = Arc::new(TvRbfKernel::new(1.0, 0.0).unwrap());
        let a = GpPrior::new("a", |_| 0.0, Arc::clone(&kernel));
        let b = GpPrior::new("b", |_| 1.0, Arc::clone(&kernel));
        let c = GpPrior::new("c", |_| 0.0, other);
        assert!(a.shares_kernel(&b));
        assert!(!a.shares_kernel(&c));
    }
}
