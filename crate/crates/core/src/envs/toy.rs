//! Synthetic hilly-mean problem with a time-alternating search space.
//!
//! The objective is one draw from a GP whose mean features ten hills, one
//! of them tall; candidate priors disagree about which. The feasible set
//! alternates between the full grid and a window that excludes the tall
//! hill, so committing to the wrong prior stays costly.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::RngCore;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{EnvError, Environment, StepOutcome};
use crate::gp::{GpPrior, Kernel, TvRbfKernel};
use crate::point::{Location, SpaceTimePoint};

/// Geometry of the hilly mean functions on `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HillMeanSpec {
    pub num_hills: usize,
    pub hill_width: f64,
    pub tall_height: f64,
    pub short_height: f64,
}

impl Default for HillMeanSpec {
    fn default() -> Self {
        Self {
            num_hills: 10,
            hill_width: 0.03,
            tall_height: 1.5,
            short_height: 0.5,
        }
    }
}

impl HillMeanSpec {
    /// Equally spaced hill centers `(n - 1/2) / num_hills`, `n = 1..`.
    pub fn centers(&self) -> Vec<f64> {
        (1..=self.num_hills)
            .map(|n| (n as f64 - 0.5) / self.num_hills as f64)
            .collect()
    }

    /// Mean value at `x` for the prior whose `tall` hill is the given
    /// 1-based index (`None`: all hills short). The hills are combined as
    /// an upper envelope of Gaussian bumps, so every hill peaks at exactly
    /// its nominal height.
    pub fn mean_value(&self, x: f64, tall: Option<usize>) -> f64 {
        let w2 = 2.0 * self.hill_width * self.hill_width;
        self.centers()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let h = if tall == Some(i + 1) { self.tall_height } else { self.short_height };
                h * (-(x - c) * (x - c) / w2).exp()
            })
            .fold(0.0, f64::max)
    }

    fn validate(&self) -> Result<(), EnvError> {
        if self.num_hills == 0 {
            return Err(EnvError::Parameter("num_hills must be at least 1".into()));
        }
        for (name, v) in [
            ("hill_width", self.hill_width),
            ("tall_height", self.tall_height),
            ("short_height", self.short_height),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(EnvError::Parameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Parameters of the toy experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToyParams {
    pub grid_points: usize,
    pub lengthscale: f64,
    pub noise_std: f64,
    /// Index of the data-generating prior (1-based hill index; 0 would be
    /// the all-short prior, which has no tall hill to exclude).
    pub true_prior: usize,
    pub hills: HillMeanSpec,
}

impl Default for ToyParams {
    fn default() -> Self {
        Self {
            grid_points: 100,
            lengthscale: 0.05,
            noise_std: 0.1,
            true_prior: 2,
            hills: HillMeanSpec::default(),
        }
    }
}

/// Evaluation grid `{i / n : i = 0..n}`; hill centers land exactly on it
/// whenever `n` is a multiple of `2 * num_hills`.
pub fn toy_grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / n as f64).collect()
}

/// The candidate priors: one per hill plus the all-short prior at index
/// 0, all sharing a single stationary RBF kernel object.
pub fn build_toy_priors(params: &ToyParams) -> Result<Vec<GpPrior>, EnvError> {
    params.hills.validate()?;
    let kernel: Arc<dyn Kernel> = Arc::new(TvRbfKernel::new(params.lengthscale, 0.0)?);
    let mut priors = Vec::with_capacity(params.hills.num_hills + 1);
    for n in 0..=params.hills.num_hills {
        let hills = params.hills.clone();
        let tall = (n > 0).then_some(n);
        priors.push(GpPrior::new(
            format!("toy-{n:02}"),
            move |z: &SpaceTimePoint| match &z.x {
                Location::Coords(c) => hills.mean_value(c[0], tall),
                Location::Arm(_) => panic!("toy prior evaluated at an arm index"),
            },
            Arc::clone(&kernel),
        ));
    }
    Ok(priors)
}

/// One draw of the objective on the grid: a multivariate normal sample
/// under the prior, evaluated at `t = 1` (the toy kernel is stationary in
/// time, so the draw defines `f` for every timestep).
pub fn sample_toy_function(
    prior: &GpPrior,
    grid: &[f64],
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>, EnvError> {
    if grid.is_empty() {
        return Err(EnvError::Parameter("grid must be non-empty".into()));
    }
    let n = grid.len();
    let points: Vec<SpaceTimePoint> =
        grid.iter().map(|&x| SpaceTimePoint::coord1(x, 1)).collect();
    let mut cov = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = prior.kernel_eval(&points[i], &points[j]);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let (chol, _) = crate::gp::cholesky_with_jitter(&cov, prior.id())?;
    let z: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let l = chol.l_dirty();
    let mut f = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = prior.mean_at(&points[i]);
        for j in 0..=i {
            v += l[(i, j)] * z[j];
        }
        f.push(v);
    }
    Ok(f)
}

/// The alternating feasible set: odd steps see the whole grid, even steps
/// lose every point within `width` of the excluded center.
pub fn toy_feasible_xs(grid: &[f64], t: u32, excluded_center: f64, width: f64) -> Vec<f64> {
    if t % 2 == 1 {
        grid.to_vec()
    } else {
        grid.iter()
            .copied()
            .filter(|x| (x - excluded_center).abs() > width + 1e-12)
            .collect()
    }
}

/// The assembled toy environment for one seed: a frozen draw of `f` plus
/// the alternating feasible schedule around the true tall hill.
pub struct ToyEnv {
    params: ToyParams,
    grid: Vec<f64>,
    f: Vec<f64>,
    excluded_center: f64,
    excluded: Vec<bool>,
    best_full: f64,
    best_restricted: f64,
}

impl ToyEnv {
    /// Draws the objective from `true_prior` using `rng`; the same rng
    /// state always yields the same environment.
    pub fn new(
        params: ToyParams,
        true_prior: &GpPrior,
        rng: &mut dyn RngCore,
    ) -> Result<Self, EnvError> {
        params.hills.validate()?;
        if params.grid_points < 2 {
            return Err(EnvError::Parameter("grid_points must be at least 2".into()));
        }
        if params.true_prior == 0 || params.true_prior > params.hills.num_hills {
            return Err(EnvError::Parameter(format!(
                "true_prior must name a tall hill in 1..={}, got {}",
                params.hills.num_hills, params.true_prior
            )));
        }
        if params.noise_std < 0.0 || !params.noise_std.is_finite() {
            return Err(EnvError::Parameter(format!(
                "noise_std must be non-negative, got {}",
                params.noise_std
            )));
        }
        let grid = toy_grid(params.grid_points);
        let f = sample_toy_function(true_prior, &grid, rng)?;
        let excluded_center = params.hills.centers()[params.true_prior - 1];
        let excluded: Vec<bool> = grid
            .iter()
            .map(|x| (x - excluded_center).abs() <= params.hills.hill_width + 1e-12)
            .collect();
        let best_full = f.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let best_restricted = f
            .iter()
            .zip(&excluded)
            .filter(|(_, &ex)| !ex)
            .map(|(&v, _)| v)
            .fold(f64::NEG_INFINITY, f64::max);
        if !best_restricted.is_finite() {
            return Err(EnvError::Parameter(
                "exclusion window covers the whole grid".into(),
            ));
        }
        Ok(Self { params, grid, f, excluded_center, excluded, best_full, best_restricted })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// The frozen objective values on the grid.
    pub fn objective(&self) -> &[f64] {
        &self.f
    }

    pub fn excluded_center(&self) -> f64 {
        self.excluded_center
    }

    fn index_of(&self, point: &SpaceTimePoint) -> Result<usize, EnvError> {
        let x = match &point.x {
            Location::Coords(c) if c.len() == 1 => c[0],
            _ => {
                return Err(EnvError::Parameter(
                    "toy environment expects 1-d coordinate points".into(),
                ))
            }
        };
        let idx = (x * self.params.grid_points as f64).round() as usize;
        if idx < self.grid.len() && self.grid[idx] == x {
            Ok(idx)
        } else {
            Err(EnvError::InfeasiblePoint { point: point.to_string(), t: point.t })
        }
    }
}

impl Environment for ToyEnv {
    fn model_noise_std(&self) -> f64 {
        self.params.noise_std
    }

    fn feasible_set(&self, t: u32) -> Vec<SpaceTimePoint> {
        toy_feasible_xs(
            &self.grid,
            t,
            self.excluded_center,
            self.params.hills.hill_width,
        )
        .into_iter()
        .map(|x| SpaceTimePoint::coord1(x, t))
        .collect()
    }

    fn oracle_value(&self, point: &SpaceTimePoint) -> Result<f64, EnvError> {
        Ok(self.f[self.index_of(point)?])
    }

    fn best_value(&self, t: u32) -> f64 {
        if t % 2 == 1 {
            self.best_full
        } else {
            self.best_restricted
        }
    }

    fn step(&self, point: &SpaceTimePoint, rng: &mut dyn RngCore) -> Result<StepOutcome, EnvError> {
        let idx = self.index_of(point)?;
        if point.t % 2 == 0 && self.excluded[idx] {
            return Err(EnvError::InfeasiblePoint { point: point.to_string(), t: point.t });
        }
        let noise = if self.params.noise_std > 0.0 {
            Normal::new(0.0, self.params.noise_std)
                .expect("validated noise_std")
                .sample(rng)
        } else {
            0.0
        };
        Ok(StepOutcome {
            y: self.f[idx] + noise,
            regret: self.best_value(point.t) - self.f[idx],
        })
    }
}
