//! Synthetic open-path measurements: acquisition schedules, a midpoint
//! quadrature oracle for the continuous beam integral, and noisy sampling.
//!
//! The simulator never touches the reconstruction grid; values come from
//! quadrature of the analytic scene, so forward and inverse paths cannot
//! share a discretization bug.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{GridSpec, Position3, SparseRow, MIN_BEAM_3D_M};
use crate::plume::{eval_displaced, Scene};
use crate::solver::ConcentrationField;

/// Quadrature resolution used by the simulator.
pub const SIM_QUADRATURE_POINTS: usize = 256;

/// Sensor's maximum sampling rate, Hz.
pub const MAX_RATE_HZ: f64 = 100.0;

/// One open-path sample: the path integral of concentration between sensor
/// and reflector, in ppm·m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamMeasurement {
    pub t: f64,
    pub sensor: Position3,
    pub reflector: Position3,
    pub value: f64,
}

/// Reflector placement during one station's dwell.
#[derive(Debug, Clone, PartialEq)]
pub enum ReflectorTrack {
    Fixed(Position3),
    /// Piecewise-linear path swept at constant speed over the dwell.
    Sweep(Vec<Position3>),
}

impl ReflectorTrack {
    /// Position at sweep fraction `u` in `[0, 1]`, uniform in arc length.
    pub fn position(&self, u: f64) -> Position3 {
        match self {
            ReflectorTrack::Fixed(p) => *p,
            ReflectorTrack::Sweep(points) => {
                if points.len() == 1 {
                    return points[0];
                }
                let mut cum = Vec::with_capacity(points.len());
                let mut total = 0.0;
                cum.push(0.0);
                for pair in points.windows(2) {
                    total += pair[0].distance(&pair[1]);
                    cum.push(total);
                }
                if total == 0.0 {
                    return points[0];
                }
                let target = u.clamp(0.0, 1.0) * total;
                let seg = cum.partition_point(|&c| c <= target).min(points.len() - 1);
                let (a, b) = (points[seg - 1], points[seg]);
                let seg_len = cum[seg] - cum[seg - 1];
                let f = if seg_len > 0.0 { (target - cum[seg - 1]) / seg_len } else { 0.0 };
                Position3 {
                    x: a.x + f * (b.x - a.x),
                    y: a.y + f * (b.y - a.y),
                    z: a.z + f * (b.z - a.z),
                }
            }
        }
    }
}

/// One sensor location with its reflector track and sampling schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct Station {
    pub sensor: Position3,
    pub reflector: ReflectorTrack,
    pub dwell_s: f64,
    pub rate_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionPlan {
    pub stations: Vec<Station>,
    /// Idle time inserted after each station; zero by default.
    pub inter_station_gap_s: f64,
}

impl AcquisitionPlan {
    pub fn new(stations: Vec<Station>) -> Result<Self> {
        let plan = Self {
            stations,
            inter_station_gap_s: 0.0,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stations.is_empty() {
            return Err(Error::InvalidArgument("plan has no stations".into()));
        }
        for (k, s) in self.stations.iter().enumerate() {
            if !(s.dwell_s > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "station {k}: dwell must be positive"
                )));
            }
            if !(s.rate_hz > 0.0) || s.rate_hz > MAX_RATE_HZ {
                return Err(Error::InvalidArgument(format!(
                    "station {k}: rate must be in (0, {MAX_RATE_HZ}] Hz"
                )));
            }
        }
        if self.inter_station_gap_s < 0.0 {
            return Err(Error::InvalidArgument("negative inter-station gap".into()));
        }
        Ok(())
    }

    /// Total schedule duration in seconds, gaps included.
    pub fn total_duration(&self) -> f64 {
        let dwell: f64 = self.stations.iter().map(|s| s.dwell_s).sum();
        dwell + self.inter_station_gap_s * self.stations.len().saturating_sub(1) as f64
    }

    pub fn n_samples(&self) -> usize {
        self.stations.iter().map(station_samples).sum()
    }
}

fn station_samples(s: &Station) -> usize {
    ((s.dwell_s * s.rate_hz).round() as usize).max(1)
}

/// Additive Gaussian measurement noise in ppm·m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma_abs: f64,
    pub clamp_nonneg: bool,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            sigma_abs: 0.0,
            clamp_nonneg: true,
        }
    }
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma_abs: 50.0,
            clamp_nonneg: true,
        }
    }
}

/// Discrete beam integral: `sum(weight_k * field_k)` in ppm·m.
pub fn integrate(field: &ConcentrationField, row: &SparseRow) -> Result<f64> {
    let n = field.values.len();
    let mut acc = 0.0;
    for &(idx, w) in &row.entries {
        if idx >= n {
            return Err(Error::SystemMismatch(format!(
                "row references cell {idx} but the field has {n} cells"
            )));
        }
        acc += w * field.values[idx];
    }
    Ok(acc)
}

/// Composite midpoint quadrature of the scene concentration along the 3D
/// segment, with the field constant in z. Independent of any grid; the
/// ground truth for the simulator.
pub fn path_integral_quadrature(
    scene: &Scene,
    sensor: &Position3,
    reflector: &Position3,
    t: f64,
    n_points: usize,
) -> Result<f64> {
    if n_points == 0 {
        return Err(Error::InvalidArgument(
            "quadrature needs at least one point".into(),
        ));
    }
    let length = sensor.distance(reflector);
    if length <= MIN_BEAM_3D_M {
        return Err(Error::DegenerateBeam);
    }
    let displaced = scene.displaced_sources(t)?;
    let mut acc = 0.0;
    for k in 0..n_points {
        let f = (k as f64 + 0.5) / n_points as f64;
        let x = sensor.x + f * (reflector.x - sensor.x);
        let y = sensor.y + f * (reflector.y - sensor.y);
        acc += eval_displaced(&displaced, scene.background, (x, y));
    }
    Ok(acc * length / n_points as f64)
}

/// Runs the acquisition plan against the scene.
///
/// Timestamps advance by `1/rate` within each dwell and stations run back to
/// back (plus the configured gap). Noise draws are keyed on
/// `(seed, sample index)`, so the output is deterministic and independent of
/// evaluation order.
pub fn simulate_measurements(
    scene: &Scene,
    plan: &AcquisitionPlan,
    noise: &NoiseModel,
    seed: u64,
) -> Result<Vec<BeamMeasurement>> {
    plan.validate()?;
    if noise.sigma_abs < 0.0 {
        return Err(Error::InvalidArgument("negative noise sigma".into()));
    }

    let mut schedule = Vec::with_capacity(plan.n_samples());
    let mut t0 = 0.0;
    for station in &plan.stations {
        let n = station_samples(station);
        for i in 0..n {
            let t = t0 + i as f64 / station.rate_hz;
            let u = if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 };
            schedule.push((t, station.sensor, station.reflector.position(u)));
        }
        t0 += station.dwell_s + plan.inter_station_gap_s;
    }

    schedule
        .par_iter()
        .enumerate()
        .map(|(idx, &(t, sensor, reflector))| {
            let clean =
                path_integral_quadrature(scene, &sensor, &reflector, t, SIM_QUADRATURE_POINTS)?;
            let value = if noise.sigma_abs > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(idx as u64);
                let eps: f64 = StandardNormal.sample(&mut rng);
                let v = clean + noise.sigma_abs * eps;
                if noise.clamp_nonneg {
                    v.max(0.0)
                } else {
                    v
                }
            } else {
                clean
            };
            Ok(BeamMeasurement {
                t,
                sensor,
                reflector,
                value,
            })
        })
        .collect()
}

/// Point on the grid perimeter at fraction `u` of the total boundary length,
/// counter-clockwise from the lower-left corner, at plane height.
pub fn perimeter_point(grid: &GridSpec, u: f64) -> Position3 {
    let w = grid.max_x() - grid.origin_x;
    let h = grid.max_y() - grid.origin_y;
    let total = 2.0 * (w + h);
    let mut d = u.rem_euclid(1.0) * total;
    let z = grid.plane_height;
    if d < w {
        return Position3::new(grid.origin_x + d, grid.origin_y, z);
    }
    d -= w;
    if d < h {
        return Position3::new(grid.max_x(), grid.origin_y + d, z);
    }
    d -= h;
    if d < w {
        return Position3::new(grid.max_x() - d, grid.max_y(), z);
    }
    d -= w;
    Position3::new(grid.origin_x, grid.max_y() - d, z)
}

/// Waypoints tracing the boundary counter-clockwise from fraction `u0` to
/// `u1` (wrapping), with corners inserted so sweeps follow the edges.
pub fn perimeter_arc(grid: &GridSpec, u0: f64, u1: f64) -> Vec<Position3> {
    let w = grid.max_x() - grid.origin_x;
    let h = grid.max_y() - grid.origin_y;
    let total = 2.0 * (w + h);
    let span = (u1 - u0).rem_euclid(1.0);
    let mut breaks = vec![0.0, span];
    for corner in [w, w + h, 2.0 * w + h, total] {
        let cu = ((corner / total) - u0).rem_euclid(1.0);
        if cu > 1e-12 && cu < span - 1e-12 {
            breaks.push(cu);
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks
        .iter()
        .map(|&du| perimeter_point(grid, u0 + du))
        .collect()
}

/// The default synthetic schedule: `n_stations` sensor positions spread
/// around the grid boundary, each sweeping the reflector along the opposite
/// stretch of the boundary during its dwell. Beams stay inside the grid.
pub fn fan_plan(grid: &GridSpec, n_stations: usize, dwell_s: f64, rate_hz: f64) -> Result<AcquisitionPlan> {
    if n_stations == 0 {
        return Err(Error::InvalidArgument("need at least one station".into()));
    }
    let stations = (0..n_stations)
        .map(|k| {
            let u = k as f64 / n_stations as f64;
            Station {
                sensor: perimeter_point(grid, u),
                reflector: ReflectorTrack::Sweep(perimeter_arc(grid, u + 0.3, u + 0.7)),
                dwell_s,
                rate_hz,
            }
        })
        .collect();
    AcquisitionPlan::new(stations)
}
