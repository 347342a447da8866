//! Points in the spatio-temporal domain.

use std::fmt;
use std::str::FromStr;

/// Spatial part of a query point: either an arm index into a declared
/// finite arm list, or a coordinate vector in a continuous box domain.
#[derive(Clone, Debug, PartialEq)]
pub enum Location {
    Arm(usize),
    Coords(Vec<f64>),
}

impl Location {
    /// Squared Euclidean distance between two coordinate locations.
    ///
    /// Panics if either location is an arm index or the dimensions differ;
    /// mixing location kinds inside one kernel is a programming error.
    pub fn sq_dist(&self, other: &Location) -> f64 {
        match (self, other) {
            (Location::Coords(a), Location::Coords(b)) => {
                assert_eq!(a.len(), b.len(), "coordinate dimensions differ");
                a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
            }
            _ => panic!("sq_dist requires coordinate locations"),
        }
    }

    pub fn as_arm(&self) -> Option<usize> {
        match self {
            Location::Arm(i) => Some(*i),
            Location::Coords(_) => None,
        }
    }
}

/// A `(x, t)` pair: a location paired with the 1-based timestep it refers to.
///
/// `t` is the prediction time, not necessarily the optimisation step at
/// which the point was queried.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimePoint {
    pub x: Location,
    pub t: u32,
}

impl SpaceTimePoint {
    pub fn arm(index: usize, t: u32) -> Self {
        Self { x: Location::Arm(index), t }
    }

    pub fn coords(x: Vec<f64>, t: u32) -> Self {
        Self { x: Location::Coords(x), t }
    }

    /// One-dimensional convenience constructor.
    pub fn coord1(x: f64, t: u32) -> Self {
        Self::coords(vec![x], t)
    }

    /// Same location at a different prediction time.
    pub fn at_time(&self, t: u32) -> Self {
        Self { x: self.x.clone(), t }
    }
}

impl fmt::Display for SpaceTimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.x {
            Location::Arm(i) => write!(f, "arm:{}@{}", i, self.t),
            Location::Coords(c) => {
                let joined: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                write!(f, "{}@{}", joined.join(";"), self.t)
            }
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("malformed space-time point: {0}")]
pub struct ParsePointError(String);

impl FromStr for SpaceTimePoint {
    type Err = ParsePointError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (loc, t) = s
            .rsplit_once('@')
            .ok_or_else(|| ParsePointError(s.to_string()))?;
        let t: u32 = t.parse().map_err(|_| ParsePointError(s.to_string()))?;
        if let Some(idx) = loc.strip_prefix("arm:") {
            let idx = idx.parse().map_err(|_| ParsePointError(s.to_string()))?;
            return Ok(SpaceTimePoint::arm(idx, t));
        }
        let coords: Result<Vec<f64>, _> = loc.split(';').map(str::parse).collect();
        match coords {
            Ok(c) if !c.is_empty() => Ok(SpaceTimePoint::coords(c, t)),
            _ => Err(ParsePointError(s.to_string())),
        }
    }
}
