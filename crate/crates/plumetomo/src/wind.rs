//! Lagrangian wind compensation: windowed wind averaging and offsetting of
//! sensor/reflector locations by `-w * dt`.

use crate::error::{Error, Result};
use crate::forward::BeamMeasurement;
use crate::geometry::Position3;

/// When an averaging window is empty, fall back to the nearest sample no
/// farther than this from the window; beyond it the wind is considered stale.
pub const MAX_WIND_GAP_S: f64 = 10.0;

/// Default advection lag, in seconds.
pub const DEFAULT_DELTA_T_S: f64 = 3.0;

/// One anemometer sample: horizontal wind in m/s at time `t` (seconds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindSample {
    pub t: f64,
    pub wx: f64,
    pub wy: f64,
}

/// Timestamped wind log, strictly ascending in `t`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WindSeries {
    samples: Vec<WindSample>,
}

impl WindSeries {
    /// Builds a series from samples in any order; rejects duplicate
    /// timestamps and non-finite values.
    pub fn new(mut samples: Vec<WindSample>) -> Result<Self> {
        for s in &samples {
            if !s.t.is_finite() || !s.wx.is_finite() || !s.wy.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite wind sample at t={}",
                    s.t
                )));
            }
        }
        samples.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
        for pair in samples.windows(2) {
            if pair[0].t == pair[1].t {
                return Err(Error::InvalidArgument(format!(
                    "duplicate wind timestamp t={}",
                    pair[0].t
                )));
            }
        }
        Ok(Self { samples })
    }

    /// Single-sample series, i.e. a constant wind valid near `t`.
    pub fn constant(t: f64, wx: f64, wy: f64) -> Self {
        Self {
            samples: vec![WindSample { t, wx, wy }],
        }
    }

    pub fn samples(&self) -> &[WindSample] {
        &self.samples
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Zero-order-hold resampling onto a regular clock over `[t0, t1]`.
    /// Before the first sample the first value is held.
    pub fn resample_hold(&self, t0: f64, t1: f64, rate_hz: f64) -> Result<WindSeries> {
        if self.samples.is_empty() {
            return Err(Error::InsufficientData("empty wind series".into()));
        }
        if !(rate_hz > 0.0) || t1 < t0 {
            return Err(Error::InvalidArgument("bad resampling window".into()));
        }
        let dt = 1.0 / rate_hz;
        let n = ((t1 - t0) / dt).floor() as usize + 1;
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let t = t0 + k as f64 * dt;
            let idx = self.samples.partition_point(|s| s.t <= t);
            let s = if idx == 0 { &self.samples[0] } else { &self.samples[idx - 1] };
            out.push(WindSample { t, wx: s.wx, wy: s.wy });
        }
        Ok(WindSeries { samples: out })
    }
}

/// Averaging lag for the offset of Eq. `x_new = x - w * dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensationConfig {
    pub delta_t: f64,
}

impl CompensationConfig {
    pub fn new(delta_t: f64) -> Result<Self> {
        if !delta_t.is_finite() || delta_t < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "delta_t must be finite and >= 0, got {delta_t}"
            )));
        }
        Ok(Self { delta_t })
    }
}

impl Default for CompensationConfig {
    fn default() -> Self {
        Self {
            delta_t: DEFAULT_DELTA_T_S,
        }
    }
}

/// Arithmetic mean of all samples with timestamp in `[t - delta_t, t]`
/// (inclusive). An empty window falls back to the sample nearest to the
/// window, provided its distance is at most [`MAX_WIND_GAP_S`].
pub fn average_wind(series: &WindSeries, t: f64, delta_t: f64) -> Result<(f64, f64)> {
    if series.is_empty() {
        return Err(Error::InsufficientData("empty wind series".into()));
    }
    if !delta_t.is_finite() || delta_t < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "delta_t must be finite and >= 0, got {delta_t}"
        )));
    }
    let lo = t - delta_t;
    let samples = series.samples();
    let start = samples.partition_point(|s| s.t < lo);
    let end = samples.partition_point(|s| s.t <= t);
    if start < end {
        let n = (end - start) as f64;
        let (mut sx, mut sy) = (0.0, 0.0);
        for s in &samples[start..end] {
            sx += s.wx;
            sy += s.wy;
        }
        return Ok((sx / n, sy / n));
    }
    // Empty window: nearest sample is either just before lo or just after t.
    let mut best: Option<(f64, &WindSample)> = None;
    if start > 0 {
        let s = &samples[start - 1];
        best = Some((lo - s.t, s));
    }
    if end < samples.len() {
        let s = &samples[end];
        let gap = s.t - t;
        if best.map_or(true, |(g, _)| gap < g) {
            best = Some((gap, s));
        }
    }
    match best {
        Some((gap, s)) if gap <= MAX_WIND_GAP_S => Ok((s.wx, s.wy)),
        _ => Err(Error::WindGap {
            t,
            max_gap_s: MAX_WIND_GAP_S,
        }),
    }
}

/// Offsets a position against the wind: `(x - wx*dt, y - wy*dt, z)`.
/// The wind is horizontal, so z is untouched.
pub fn compensate(position: &Position3, wind: (f64, f64), delta_t: f64) -> Position3 {
    Position3 {
        x: position.x - wind.0 * delta_t,
        y: position.y - wind.1 * delta_t,
        z: position.z,
    }
}

/// Applies the same `-w*dt` offset to both beam endpoints, with `w` averaged
/// over `[t - dt, t]` at the beam's own timestamp. Value and timestamp are
/// unchanged, so beam length and direction are preserved exactly.
pub fn compensate_beam(
    beam: &BeamMeasurement,
    series: &WindSeries,
    cfg: &CompensationConfig,
) -> Result<BeamMeasurement> {
    let w = average_wind(series, beam.t, cfg.delta_t)?;
    Ok(BeamMeasurement {
        t: beam.t,
        sensor: compensate(&beam.sensor, w, cfg.delta_t),
        reflector: compensate(&beam.reflector, w, cfg.delta_t),
        value: beam.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn series_3() -> WindSeries {
        WindSeries::new(vec![
            WindSample { t: 0.0, wx: 1.0, wy: 0.0 },
            WindSample { t: 1.0, wx: 3.0, wy: 0.0 },
            WindSample { t: 2.0, wx: 5.0, wy: 0.0 },
        ])
        .unwrap()
    }

    #[test]
    fn average_over_window() {
        let w = average_wind(&series_3(), 2.0, 3.0).unwrap();
        assert_relative_eq!(w.0, 3.0);
        assert_relative_eq!(w.1, 0.0);
    }

    #[test]
    fn single_sample_zero_width_window() {
        let s = WindSeries::constant(0.0, 1.0, 0.0);
        let w = average_wind(&s, 0.0, 0.0).unwrap();
        assert_relative_eq!(w.0, 1.0);
    }

    #[test]
    fn gap_beyond_limit_errors() {
        let s = WindSeries::constant(0.0, 1.0, 0.0);
        assert!(matches!(
            average_wind(&s, 100.0, 3.0),
            Err(Error::WindGap { .. })
        ));
    }

    #[test]
    fn nearest_fallback_within_gap() {
        let s = WindSeries::constant(0.0, 1.0, 2.0);
        // Window [5, 8] is empty; nearest sample is 5 s away.
        let w = average_wind(&s, 8.0, 3.0).unwrap();
        assert_relative_eq!(w.0, 1.0);
        assert_relative_eq!(w.1, 2.0);
    }

    #[test]
    fn duplicate_timestamps_rejected() {
        let r = WindSeries::new(vec![
            WindSample { t: 1.0, wx: 0.0, wy: 0.0 },
            WindSample { t: 1.0, wx: 1.0, wy: 0.0 },
        ]);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn out_of_order_samples_are_sorted() {
        let s = WindSeries::new(vec![
            WindSample { t: 2.0, wx: 2.0, wy: 0.0 },
            WindSample { t: 0.0, wx: 0.0, wy: 0.0 },
            WindSample { t: 1.0, wx: 1.0, wy: 0.0 },
        ])
        .unwrap();
        let ts: Vec<f64> = s.samples().iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn compensate_matches_direct_arithmetic() {
        let p = Position3::new(10.0, 5.0, 1.5);
        let q = compensate(&p, (2.0, -1.0), 3.0);
        assert_relative_eq!(q.x, 4.0);
        assert_relative_eq!(q.y, 8.0);
        assert_relative_eq!(q.z, 1.5);
    }

    #[test]
    fn zero_wind_and_zero_lag_are_identities() {
        let p = Position3::new(-2.0, 7.0, 0.3);
        assert_eq!(compensate(&p, (0.0, 0.0), 3.0), p);
        assert_eq!(compensate(&p, (4.0, -2.0), 0.0), p);
    }

    #[test]
    fn compensate_beam_shifts_both_endpoints() {
        let s = WindSeries::constant(10.0, 1.0, 0.0);
        let beam = BeamMeasurement {
            t: 10.0,
            sensor: Position3::new(0.0, 0.0, 1.5),
            reflector: Position3::new(10.0, 0.0, 1.5),
            value: 1234.5,
        };
        let cfg = CompensationConfig::new(3.0).unwrap();
        let out = compensate_beam(&beam, &s, &cfg).unwrap();
        assert_relative_eq!(out.sensor.x, -3.0);
        assert_relative_eq!(out.reflector.x, 7.0);
        assert_relative_eq!(out.value, 1234.5);
        assert_relative_eq!(
            out.sensor.distance(&out.reflector),
            beam.sensor.distance(&beam.reflector),
            max_relative = 1e-15
        );

        let zero_lag = CompensationConfig::new(0.0).unwrap();
        let same = compensate_beam(&beam, &s, &zero_lag).unwrap();
        assert_eq!(same.sensor, beam.sensor);
        assert_eq!(same.reflector, beam.reflector);
    }

    #[test]
    fn resample_hold_covers_span() {
        let s = WindSeries::new(vec![
            WindSample { t: 0.0, wx: 1.0, wy: 0.0 },
            WindSample { t: 10.0, wx: 2.0, wy: 0.0 },
        ])
        .unwrap();
        let r = s.resample_hold(0.0, 20.0, 1.0).unwrap();
        assert_eq!(r.len(), 21);
        assert_relative_eq!(r.samples()[5].wx, 1.0);
        assert_relative_eq!(r.samples()[10].wx, 2.0);
        assert_relative_eq!(r.samples()[20].wx, 2.0);
    }
}
