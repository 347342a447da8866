//! Sensor-temperature task: raw measurement ingestion, empirical
//! covariance priors built from historical days, and the resulting
//! environment (pick the hottest sensor at each interval).

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{EnvError, Environment, StepOutcome};
use crate::gp::{CovTableKernel, GpPrior, Kernel};
use crate::point::{Location, SpaceTimePoint};

const MINUTES_PER_DAY: u32 = 24 * 60;

/// Per-interval, per-sensor mean temperatures for one day, with gaps
/// imputed and unusable sensors dropped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DayMatrix {
    pub day: String,
    pub sensor_ids: Vec<u32>,
    /// intervals x sensors, column order matching `sensor_ids`.
    pub values: Vec<Vec<f64>>,
    /// Sensors dropped for exceeding 50% missing intervals.
    pub dropped_sensors: Vec<u32>,
    /// Lines for this day that failed to parse.
    pub skipped_lines: usize,
}

impl DayMatrix {
    pub fn num_intervals(&self) -> usize {
        self.values.len()
    }

    /// Sub-matrix (intervals x len(sensors)) for the requested sensors,
    /// in the requested order.
    pub fn columns_for(&self, sensors: &[u32]) -> Result<DMatrix<f64>, EnvError> {
        let idx: Vec<usize> = sensors
            .iter()
            .map(|s| {
                self.sensor_ids.iter().position(|t| t == s).ok_or_else(|| {
                    EnvError::Parameter(format!(
                        "day {} does not cover sensor {s}",
                        self.day
                    ))
                })
            })
            .collect::<Result<_, _>>()?;
        let n_t = self.values.len();
        Ok(DMatrix::from_fn(n_t, idx.len(), |t, j| self.values[t][idx[j]]))
    }
}

struct SensorAccum {
    sums: Vec<f64>,
    counts: Vec<u32>,
}

fn parse_record(line: &str) -> Option<(&str, usize, u32, f64, u32)> {
    // `date time epoch moteid temperature [humidity light voltage]`
    let mut it = line.split_whitespace();
    let date = it.next()?;
    let time = it.next()?;
    let _epoch = it.next()?;
    let moteid: u32 = it.next()?.parse().ok()?;
    let temperature: f64 = it.next()?.parse().ok().filter(|t: &f64| t.is_finite())?;

    let mut hms = time.split(':');
    let h: u32 = hms.next()?.parse().ok()?;
    let m: u32 = hms.next()?.parse().ok()?;
    let s: f64 = hms.next()?.parse().ok()?;
    if hms.next().is_some() || h >= 24 || m >= 60 || !(0.0..60.0).contains(&s) {
        return None;
    }
    let seconds = f64::from(h) * 3600.0 + f64::from(m) * 60.0 + s;
    Some((date, seconds as usize, moteid, temperature, h))
}

/// Parse raw whitespace-separated measurement records into one matrix per
/// requested day, bucketing by `interval_minutes` and averaging within
/// each (interval, sensor) cell. Missing cells are imputed by carrying
/// the last observation forward (day mean for leading gaps); sensors
/// missing more than half the intervals are dropped and reported.
pub fn ingest_intel_days<R: BufRead>(
    input: R,
    days: &[String],
    interval_minutes: u32,
) -> Result<Vec<DayMatrix>, EnvError> {
    if interval_minutes == 0 || interval_minutes > MINUTES_PER_DAY {
        return Err(EnvError::Parameter(format!(
            "interval_minutes must lie in 1..={MINUTES_PER_DAY}, got {interval_minutes}"
        )));
    }
    if days.is_empty() {
        return Err(EnvError::Parameter("no days requested".into()));
    }
    let intervals = MINUTES_PER_DAY.div_ceil(interval_minutes) as usize;
    let bucket_seconds = interval_minutes as usize * 60;

    let mut per_day: BTreeMap<&str, BTreeMap<u32, SensorAccum>> = BTreeMap::new();
    let mut skipped: BTreeMap<&str, usize> = BTreeMap::new();
    for day in days {
        per_day.insert(day, BTreeMap::new());
        skipped.insert(day, 0);
    }

    for line in input.lines() {
        let line = line.map_err(|e| EnvError::Ingestion(format!("read failure: {e}")))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let Some(day_token) = trimmed.split_whitespace().next() else {
            continue;
        };
        let Some(day_key) = per_day.keys().copied().find(|d| *d == day_token) else {
            continue;
        };
        match parse_record(trimmed) {
            Some((_, seconds, moteid, temperature, _)) => {
                let bucket = seconds / bucket_seconds;
                let acc = per_day
                    .get_mut(day_key)
                    .expect("present")
                    .entry(moteid)
                    .or_insert_with(|| SensorAccum {
                        sums: vec![0.0; intervals],
                        counts: vec![0; intervals],
                    });
                acc.sums[bucket] += temperature;
                acc.counts[bucket] += 1;
            }
            None => *skipped.get_mut(day_key).expect("present") += 1,
        }
    }

    let mut out = Vec::with_capacity(days.len());
    for day in days {
        let sensors = per_day.remove(day.as_str()).expect("present");
        if sensors.is_empty() {
            return Err(EnvError::Ingestion(format!(
                "no parseable records for day {day}"
            )));
        }
        let mut sensor_ids = Vec::new();
        let mut dropped = Vec::new();
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for (id, acc) in sensors {
            let observed = acc.counts.iter().filter(|&&c| c > 0).count();
            let missing_frac = 1.0 - observed as f64 / intervals as f64;
            if missing_frac > 0.5 {
                dropped.push(id);
                continue;
            }
            let mut col = vec![f64::NAN; intervals];
            let mut total = 0.0;
            for (i, (&s, &c)) in acc.sums.iter().zip(&acc.counts).enumerate() {
                if c > 0 {
                    col[i] = s / f64::from(c);
                    total += col[i];
                }
            }
            let day_mean = total / observed as f64;
            let mut last: Option<f64> = None;
            for v in col.iter_mut() {
                if v.is_nan() {
                    *v = last.unwrap_or(day_mean);
                } else {
                    last = Some(*v);
                }
            }
            sensor_ids.push(id);
            columns.push(col);
        }
        if sensor_ids.is_empty() {
            return Err(EnvError::Ingestion(format!(
                "every sensor on day {day} exceeds the missing-data bound"
            )));
        }
        let values = (0..intervals)
            .map(|t| columns.iter().map(|c| c[t]).collect())
            .collect();
        out.push(DayMatrix {
            day: day.clone(),
            sensor_ids,
            values,
            dropped_sensors: dropped,
            skipped_lines: skipped[day.as_str()],
        });
    }
    Ok(out)
}

/// Single-day convenience wrapper around [`ingest_intel_days`].
pub fn ingest_intel<R: BufRead>(
    input: R,
    day: &str,
    interval_minutes: u32,
) -> Result<DayMatrix, EnvError> {
    let mut v = ingest_intel_days(input, &[day.to_string()], interval_minutes)?;
    Ok(v.pop().expect("one day in, one matrix out"))
}

/// Cache a day matrix as CSV with header `interval,sensor_<id>,...`.
pub fn write_day_csv<W: Write>(matrix: &DayMatrix, mut w: W) -> std::io::Result<()> {
    let header: Vec<String> = std::iter::once("interval".to_string())
        .chain(matrix.sensor_ids.iter().map(|id| format!("sensor_{id}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (t, row) in matrix.values.iter().enumerate() {
        let cells: Vec<String> = std::iter::once(t.to_string())
            .chain(row.iter().map(|v| v.to_string()))
            .collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Read back a day matrix cached by [`write_day_csv`]. The day label is
/// not stored in the CSV and must be supplied.
pub fn read_day_csv<R: BufRead>(reader: R, day: &str) -> Result<DayMatrix, EnvError> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| EnvError::Ingestion("empty day CSV".into()))?
        .map_err(|e| EnvError::Ingestion(format!("read failure: {e}")))?;
    let mut cols = header.split(',');
    if cols.next() != Some("interval") {
        return Err(EnvError::Ingestion("day CSV must start with `interval`".into()));
    }
    let sensor_ids: Vec<u32> = cols
        .map(|c| {
            c.strip_prefix("sensor_")
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| EnvError::Ingestion(format!("bad sensor column `{c}`")))
        })
        .collect::<Result<_, _>>()?;
    let mut values = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| EnvError::Ingestion(format!("read failure: {e}")))?;
        let mut cells = line.split(',');
        let t: usize = cells
            .next()
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| EnvError::Ingestion(format!("bad interval index on row {i}")))?;
        if t != i {
            return Err(EnvError::Ingestion(format!(
                "interval column out of order on row {i}"
            )));
        }
        let row: Vec<f64> = cells
            .map(|c| {
                c.parse()
                    .map_err(|_| EnvError::Ingestion(format!("bad value `{c}` on row {i}")))
            })
            .collect::<Result<_, _>>()?;
        if row.len() != sensor_ids.len() {
            return Err(EnvError::Ingestion(format!("row {i} has {} cells", row.len())));
        }
        values.push(row);
    }
    Ok(DayMatrix {
        day: day.to_string(),
        sensor_ids,
        values,
        dropped_sensors: Vec::new(),
        skipped_lines: 0,
    })
}

/// Log marginal likelihood of a fully observed day under the separable
/// kernel `corr[i,i'] * rho^(|t-t'|)` with `rho = sqrt(1 - eps)` plus
/// observation noise, evaluated through the eigendecompositions of the
/// two factors instead of one dense Gram solve.
fn separable_lml(
    corr_eigvals: &[f64],
    z_rotated: &DMatrix<f64>,
    eps: f64,
    noise_var: f64,
) -> f64 {
    let n_t = z_rotated.nrows();
    let rho = (1.0 - eps).sqrt();
    let d = DMatrix::from_fn(n_t, n_t, |i, j| rho.powi((i as i32 - j as i32).abs()));
    let eig_d = SymmetricEigen::new(d);
    let w = eig_d.eigenvectors.transpose() * z_rotated;
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    let mut lml = 0.0;
    for j in 0..w.ncols() {
        let lam = corr_eigvals[j].max(0.0);
        for t in 0..n_t {
            let var = eig_d.eigenvalues[t].max(0.0) * lam + noise_var;
            let v = w[(t, j)];
            lml += -0.5 * (v * v / var + var.ln() + ln_2pi);
        }
    }
    lml
}

/// Pick the forgetting factor maximising the day's marginal likelihood
/// over a grid; returns the winner and the full likelihood curve. Ties
/// break to the smallest grid value.
pub fn fit_forgetting(
    corr: &DMatrix<f64>,
    standardized: &DMatrix<f64>,
    noise_var: f64,
    grid: &[f64],
) -> Result<(f64, Vec<f64>), EnvError> {
    if grid.is_empty() {
        return Err(EnvError::Parameter("epsilon grid is empty".into()));
    }
    if grid.iter().any(|e| !(0.0..=1.0).contains(e)) {
        return Err(EnvError::Parameter("epsilon grid values must lie in [0, 1]".into()));
    }
    let eig_c = SymmetricEigen::new(corr.clone());
    let z_rotated = standardized * &eig_c.eigenvectors;
    let eigvals: Vec<f64> = eig_c.eigenvalues.iter().copied().collect();
    let curve: Vec<f64> = grid
        .iter()
        .map(|&eps| separable_lml(&eigvals, &z_rotated, eps, noise_var))
        .collect();
    let mut best = 0usize;
    for (i, &v) in curve.iter().enumerate() {
        if v > curve[best] {
            best = i;
        }
    }
    Ok((grid[best], curve))
}

/// Output of [`build_intel_priors`].
pub struct IntelPriorBuild {
    pub priors: Vec<GpPrior>,
    /// Final sensor set shared by every prior, in ascending id order.
    pub sensor_ids: Vec<u32>,
    /// Per-day fitted observation-noise levels (standardized units).
    pub per_day_noise: Vec<f64>,
    pub per_day_forgetting: Vec<f64>,
    pub warnings: Vec<String>,
}

fn column_stats(col: &[f64]) -> (f64, f64) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// One prior per historical day: per-sensor standardization, empirical
/// correlation as the covariance table (so the kernel obeys the unit
/// bound), zero mean, and a forgetting factor fitted on that day.
/// Sensors a day cannot standardize (constant readings) are dropped from
/// the common set, with a warning naming the day.
pub fn build_intel_priors(
    history: &[DayMatrix],
    target_sensors: &[u32],
    eps_grid: &[f64],
    noise_floor: f64,
) -> Result<IntelPriorBuild, EnvError> {
    if history.is_empty() {
        return Err(EnvError::Parameter("no historical days supplied".into()));
    }
    if !(noise_floor > 0.0) {
        return Err(EnvError::Parameter("noise_floor must be positive".into()));
    }
    let mut warnings = Vec::new();

    // Restrict to sensors every day actually covers.
    let mut sensors: Vec<u32> = target_sensors.to_vec();
    sensors.sort_unstable();
    sensors.dedup();
    for day in history {
        let before = sensors.len();
        sensors.retain(|s| day.sensor_ids.contains(s));
        if sensors.len() < before {
            warnings.push(format!("day {} is missing some target sensors", day.day));
        }
    }

    // Drop sensors any day cannot standardize.
    let mut degenerate: Vec<u32> = Vec::new();
    for day in history {
        let cols = day.columns_for(&sensors)?;
        for (j, &s) in sensors.iter().enumerate() {
            let col: Vec<f64> = cols.column(j).iter().copied().collect();
            let (_, std) = column_stats(&col);
            if std < 1e-9 && !degenerate.contains(&s) {
                degenerate.push(s);
                warnings.push(format!(
                    "sensor {s} has constant readings on day {}; dropped",
                    day.day
                ));
            }
        }
    }
    sensors.retain(|s| !degenerate.contains(s));
    if sensors.len() < 2 {
        return Err(EnvError::Parameter(
            "fewer than two usable sensors remain after filtering".into(),
        ));
    }

    let mut priors = Vec::with_capacity(history.len());
    let mut per_day_noise = Vec::with_capacity(history.len());
    let mut per_day_forgetting = Vec::with_capacity(history.len());
    for day in history {
        let raw = day.columns_for(&sensors)?;
        let n_t = raw.nrows();
        let m = raw.ncols();
        let mut z = DMatrix::zeros(n_t, m);
        for j in 0..m {
            let col: Vec<f64> = raw.column(j).iter().copied().collect();
            let (mean, std) = column_stats(&col);
            for t in 0..n_t {
                z[(t, j)] = (raw[(t, j)] - mean) / std;
            }
        }
        let mut corr = z.transpose() * &z / n_t as f64;
        for i in 0..m {
            corr[(i, i)] = 1.0;
            for j in 0..i {
                let v = corr[(i, j)].clamp(-1.0, 1.0);
                corr[(i, j)] = v;
                corr[(j, i)] = v;
            }
        }

        // Residual std of the naive one-step-ahead predictor, pooled over
        // sensors, as the day's observation noise.
        let mut sq_sum = 0.0;
        let mut count = 0usize;
        for j in 0..m {
            for t in 1..n_t {
                let d = z[(t, j)] - z[(t - 1, j)];
                sq_sum += d * d;
                count += 1;
            }
        }
        let noise = (sq_sum / count.max(1) as f64).sqrt().max(noise_floor);
        let (eps, _) = fit_forgetting(&corr, &z, noise * noise, eps_grid)?;

        let kernel: Arc<dyn Kernel> = Arc::new(CovTableKernel::new(corr, eps)?);
        priors.push(GpPrior::new(day.day.clone(), |_| 0.0, kernel));
        per_day_noise.push(noise);
        per_day_forgetting.push(eps);
    }

    Ok(IntelPriorBuild { priors, sensor_ids: sensors, per_day_noise, per_day_forgetting, warnings })
}

/// Pooled mean and standard deviation of the selected sensors across a
/// set of day matrices; the standardization applied to the target day.
pub fn pooled_stats(days: &[DayMatrix], sensors: &[u32]) -> Result<(f64, f64), EnvError> {
    let mut values = Vec::new();
    for day in days {
        let cols = day.columns_for(sensors)?;
        values.extend(cols.iter().copied());
    }
    if values.is_empty() {
        return Err(EnvError::Parameter("no values to pool".into()));
    }
    let (mean, std) = column_stats(&values);
    if std < 1e-9 {
        return Err(EnvError::Parameter("pooled values are constant".into()));
    }
    Ok((mean, std))
}

/// The hottest-sensor selection task on one target day. Policies observe
/// standardized temperatures (matching the unit-bound kernels built from
/// history); regret is reported in raw degrees.
pub struct IntelEnv {
    raw: DMatrix<f64>,
    standardized: DMatrix<f64>,
    best_raw: Vec<f64>,
    best_std: Vec<f64>,
    num_sensors: usize,
    horizon: u32,
    model_noise: f64,
}

impl IntelEnv {
    pub fn new(
        target: &DayMatrix,
        sensors: &[u32],
        pool_mean: f64,
        pool_std: f64,
        model_noise: f64,
    ) -> Result<Self, EnvError> {
        if !(pool_std > 0.0) || !(model_noise > 0.0) {
            return Err(EnvError::Parameter(
                "pool_std and model_noise must be positive".into(),
            ));
        }
        let raw = target.columns_for(sensors)?;
        let standardized = raw.map(|v| (v - pool_mean) / pool_std);
        let best_raw: Vec<f64> = (0..raw.nrows())
            .map(|t| raw.row(t).iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let best_std: Vec<f64> = best_raw.iter().map(|v| (v - pool_mean) / pool_std).collect();
        Ok(Self {
            num_sensors: raw.ncols(),
            horizon: raw.nrows() as u32,
            raw,
            standardized,
            best_raw,
            best_std,
            model_noise,
        })
    }

    fn cell_of(&self, point: &SpaceTimePoint) -> Result<(usize, usize), EnvError> {
        let arm = match &point.x {
            Location::Arm(i) if *i < self.num_sensors => *i,
            _ => {
                return Err(EnvError::InfeasiblePoint {
                    point: point.to_string(),
                    t: point.t,
                })
            }
        };
        if point.t == 0 || point.t > self.horizon {
            return Err(EnvError::InfeasiblePoint { point: point.to_string(), t: point.t });
        }
        Ok((point.t as usize - 1, arm))
    }
}

impl Environment for IntelEnv {
    fn max_horizon(&self) -> Option<u32> {
        Some(self.horizon)
    }

    fn model_noise_std(&self) -> f64 {
        self.model_noise
    }

    fn feasible_set(&self, t: u32) -> Vec<SpaceTimePoint> {
        (0..self.num_sensors).map(|i| SpaceTimePoint::arm(i, t)).collect()
    }

    fn oracle_value(&self, point: &SpaceTimePoint) -> Result<f64, EnvError> {
        let (t, arm) = self.cell_of(point)?;
        Ok(self.standardized[(t, arm)])
    }

    fn best_value(&self, t: u32) -> f64 {
        self.best_std[t as usize - 1]
    }

    /// Measurement noise is intrinsic to the recorded data, so no fresh
    /// noise is added here; the rng is unused.
    fn step(&self, point: &SpaceTimePoint, _rng: &mut dyn RngCore) -> Result<StepOutcome, EnvError> {
        let (t, arm) = self.cell_of(point)?;
        Ok(StepOutcome {
            y: self.standardized[(t, arm)],
            regret: self.best_raw[t] - self.raw[(t, arm)],
        })
    }
}
