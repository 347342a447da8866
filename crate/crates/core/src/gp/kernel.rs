//! Spatio-temporal kernels.

use nalgebra::DMatrix;

use super::GpError;
use crate::point::{Location, SpaceTimePoint};

/// A positive semi-definite covariance function over `(x, t)` pairs,
/// normalised so that `k(z, z) <= 1`.
pub trait Kernel: Send + Sync {
    fn eval(&self, a: &SpaceTimePoint, b: &SpaceTimePoint) -> f64;
}

/// Temporal decay factor `(1 - eps)^(|t - t'| / 2)`.
fn forgetting_factor(t: u32, t2: u32, forgetting: f64) -> f64 {
    // IEEE powf gives 0^0 = 1, so eps = 1 still yields k(z, z) = 1.
    (1.0 - forgetting).powf(f64::from(t.abs_diff(t2)) / 2.0)
}

/// Time-varying RBF kernel value
/// `exp(-||x - x'||^2 / (2 l)) * (1 - eps)^(|t - t'| / 2)`.
///
/// `forgetting = 0` recovers a stationary RBF on the spatial part.
pub fn tv_rbf_kernel(
    x: &[f64],
    t: u32,
    x2: &[f64],
    t2: u32,
    lengthscale: f64,
    forgetting: f64,
) -> Result<f64, GpError> {
    if !(lengthscale > 0.0) {
        return Err(GpError::Parameter(format!(
            "lengthscale must be positive, got {lengthscale}"
        )));
    }
    if !(0.0..=1.0).contains(&forgetting) {
        return Err(GpError::Parameter(format!(
            "forgetting factor must lie in [0, 1], got {forgetting}"
        )));
    }
    if x.len() != x2.len() {
        return Err(GpError::Parameter(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            x2.len()
        )));
    }
    let sq: f64 = x.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-sq / (2.0 * lengthscale)).exp() * forgetting_factor(t, t2, forgetting))
}

/// Time-varying RBF kernel over coordinate locations.
#[derive(Debug, Clone)]
pub struct TvRbfKernel {
    lengthscale: f64,
    forgetting: f64,
}

impl TvRbfKernel {
    pub fn new(lengthscale: f64, forgetting: f64) -> Result<Self, GpError> {
        // Reuse the parameter validation of the free function.
        tv_rbf_kernel(&[0.0], 1, &[0.0], 1, lengthscale, forgetting)?;
        Ok(Self { lengthscale, forgetting })
    }

    pub fn forgetting(&self) -> f64 {
        self.forgetting
    }
}

impl Kernel for TvRbfKernel {
    fn eval(&self, a: &SpaceTimePoint, b: &SpaceTimePoint) -> f64 {
        match (&a.x, &b.x) {
            (Location::Coords(xa), Location::Coords(xb)) => {
                tv_rbf_kernel(xa, a.t, xb, b.t, self.lengthscale, self.forgetting)
                    .expect("parameters validated at construction")
            }
            _ => panic!("TvRbfKernel expects coordinate locations"),
        }
    }
}

/// Finite-domain kernel given by an explicit per-arm covariance table,
/// combined with the usual temporal decay:
/// `k((i, t), (i', t')) = table[i, i'] * (1 - eps)^(|t - t'| / 2)`.
#[derive(Debug, Clone)]
pub struct CovTableKernel {
    table: DMatrix<f64>,
    forgetting: f64,
}

impl CovTableKernel {
    pub fn new(table: DMatrix<f64>, forgetting: f64) -> Result<Self, GpError> {
        if table.nrows() != table.ncols() || table.is_empty() {
            return Err(GpError::Parameter(format!(
                "covariance table must be square and non-empty, got {}x{}",
                table.nrows(),
                table.ncols()
            )));
        }
        if !(0.0..=1.0).contains(&forgetting) {
            return Err(GpError::Parameter(format!(
                "forgetting factor must lie in [0, 1], got {forgetting}"
            )));
        }
        for i in 0..table.nrows() {
            for j in 0..i {
                if (table[(i, j)] - table[(j, i)]).abs() > 1e-9 {
                    return Err(GpError::Parameter(format!(
                        "covariance table is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { table, forgetting })
    }

    pub fn num_arms(&self) -> usize {
        self.table.nrows()
    }

    pub fn table(&self) -> &DMatrix<f64> {
        &self.table
    }
}

impl Kernel for CovTableKernel {
    fn eval(&self, a: &SpaceTimePoint, b: &SpaceTimePoint) -> f64 {
        match (&a.x, &b.x) {
            (Location::Arm(i), Location::Arm(j)) => {
                assert!(
                    *i < self.table.nrows() && *j < self.table.ncols(),
                    "arm index out of range"
                );
                self.table[(*i, *j)] * forgetting_factor(a.t, b.t, self.forgetting)
            }
            _ => panic!("CovTableKernel expects arm locations"),
        }
    }
}
