//! Synthetic ground-truth plumes: Gaussian sources advected by a spatially
//! constant wind, with no diffusion. Each source center is displaced by the
//! averaged wind times its transport lag, so the fields have closed-form
//! values everywhere and every downstream test has an analytic oracle.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::GridSpec;
use crate::solver::ConcentrationField;
use crate::wind::{average_wind, WindSeries};

/// Default ambient CO2 level in ppm. A typical atmospheric value, purely a
/// fixture default and configurable everywhere.
pub const DEFAULT_BACKGROUND_PPM: f64 = 420.0;

/// An isotropic Gaussian source emitting at ground level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasSource {
    pub sx: f64,
    pub sy: f64,
    /// Peak excess concentration at the measurement plane, ppm.
    pub amplitude: f64,
    /// Gaussian spread, m.
    pub sigma: f64,
    /// Time for emitted gas to reach the plane, s.
    pub transport_lag: f64,
}

impl GasSource {
    pub fn validate(&self) -> Result<()> {
        if self.amplitude < 0.0 || !(self.sigma > 0.0) || self.transport_lag < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "bad source: amplitude={}, sigma={}, lag={}",
                self.amplitude, self.sigma, self.transport_lag
            )));
        }
        Ok(())
    }
}

/// A complete synthetic scene: sources, ambient background, and the wind
/// series that drives advection.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub sources: Vec<GasSource>,
    pub background: f64,
    pub wind: WindSeries,
    pub seed: u64,
}

impl Scene {
    /// Effective source centers at time `t`: each center is displaced by the
    /// averaged wind over `[t - lag, t]` times its lag. Sources with zero
    /// lag never consult the wind series.
    pub fn displaced_sources(&self, t: f64) -> Result<Vec<GasSource>> {
        let mut out = Vec::with_capacity(self.sources.len());
        for s in &self.sources {
            let (cx, cy) = if s.transport_lag > 0.0 {
                let w = average_wind(&self.wind, t, s.transport_lag)?;
                (s.sx + w.0 * s.transport_lag, s.sy + w.1 * s.transport_lag)
            } else {
                (s.sx, s.sy)
            };
            out.push(GasSource { sx: cx, sy: cy, ..*s });
        }
        Ok(out)
    }
}

/// Concentration in ppm at a 2D point on the measurement plane.
pub fn concentration_at(scene: &Scene, point: (f64, f64), t: f64) -> Result<f64> {
    let displaced = scene.displaced_sources(t)?;
    Ok(eval_displaced(&displaced, scene.background, point))
}

/// Sum of displaced Gaussians plus background; shared with the quadrature
/// path so a per-beam wind lookup can be hoisted out of the inner loop.
pub(crate) fn eval_displaced(displaced: &[GasSource], background: f64, point: (f64, f64)) -> f64 {
    let mut c = background;
    for s in displaced {
        let dx = point.0 - s.sx;
        let dy = point.1 - s.sy;
        let d2 = dx * dx + dy * dy;
        c += s.amplitude * (-d2 / (2.0 * s.sigma * s.sigma)).exp();
    }
    c
}

/// Rasterizes the scene at cell centers.
pub fn field_at(scene: &Scene, grid: &GridSpec, t: f64) -> Result<ConcentrationField> {
    let displaced = scene.displaced_sources(t)?;
    let mut values = Vec::with_capacity(grid.n_cells());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            values.push(eval_displaced(&displaced, scene.background, grid.cell_center(i, j)));
        }
    }
    Ok(ConcentrationField {
        grid: *grid,
        values,
    })
}

/// Test-scene factory: `n_sources` Gaussians sampled uniformly over the grid
/// extents, fully determined by `seed`.
///
/// Generated sources carry zero transport lag and the scene starts with calm
/// wind, so it is usable at any timestamp; set `wind` and per-source lags
/// afterwards for advection studies.
pub fn random_scene(
    seed: u64,
    n_sources: usize,
    area: &GridSpec,
    amp_range: (f64, f64),
    sigma_range: (f64, f64),
) -> Result<Scene> {
    if !(amp_range.0 > 0.0 && amp_range.1 >= amp_range.0) {
        return Err(Error::InvalidArgument(format!(
            "bad amplitude range {amp_range:?}"
        )));
    }
    if !(sigma_range.0 > 0.0 && sigma_range.1 >= sigma_range.0) {
        return Err(Error::InvalidArgument(format!(
            "bad sigma range {sigma_range:?}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sources = (0..n_sources)
        .map(|_| GasSource {
            sx: rng.random_range(area.origin_x..=area.max_x()),
            sy: rng.random_range(area.origin_y..=area.max_y()),
            amplitude: rng.random_range(amp_range.0..=amp_range.1),
            sigma: rng.random_range(sigma_range.0..=sigma_range.1),
            transport_lag: 0.0,
        })
        .collect();
    Ok(Scene {
        sources,
        background: DEFAULT_BACKGROUND_PPM,
        wind: WindSeries::constant(0.0, 0.0, 0.0),
        seed,
    })
}
