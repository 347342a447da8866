//! The observation log: the dataset conditioned on at each step.

use super::GpError;
use crate::point::SpaceTimePoint;

/// Ordered history of `((x, t), y)` observations with one shared noise
/// level. Timesteps are strictly increasing: one query per step.
#[derive(Clone, Debug)]
pub struct ObservationLog {
    entries: Vec<(SpaceTimePoint, f64)>,
    noise_std: f64,
}

impl ObservationLog {
    pub fn new(noise_std: f64) -> Result<Self, GpError> {
        if !(noise_std > 0.0) || !noise_std.is_finite() {
            return Err(GpError::Parameter(format!(
                "noise_std must be positive and finite, got {noise_std}"
            )));
        }
        Ok(Self { entries: Vec::new(), noise_std })
    }

    pub fn from_entries(
        entries: Vec<(SpaceTimePoint, f64)>,
        noise_std: f64,
    ) -> Result<Self, GpError> {
        let mut log = Self::new(noise_std)?;
        for (p, y) in entries {
            log.push(p, y)?;
        }
        Ok(log)
    }

    pub fn push(&mut self, point: SpaceTimePoint, y: f64) -> Result<(), GpError> {
        let prev = self.entries.last().map(|(p, _)| p.t).unwrap_or(0);
        if point.t <= prev {
            return Err(GpError::NonIncreasingTimestep { prev, next: point.t });
        }
        self.entries.push((point, y));
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn noise_std(&self) -> f64 {
        self.noise_std
    }

    pub fn entries(&self) -> &[(SpaceTimePoint, f64)] {
        &self.entries
    }

    pub fn points(&self) -> impl Iterator<Item = &SpaceTimePoint> {
        self.entries.iter().map(|(p, _)| p)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|(_, y)| *y)
    }
}
