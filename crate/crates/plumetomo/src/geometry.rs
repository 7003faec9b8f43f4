//! Reconstruction grid and exact ray–cell chord computation.
//!
//! Beams live in 3D but the map is a horizontal 2D slice, so a beam is
//! projected onto the plane, traversed cell by cell, and its chords are
//! rescaled by the ratio of the 3D to the 2D path length (the field is
//! treated as constant in z near the plane).

use crate::error::{Error, Result};

/// Segments shorter than this (in metres) are considered degenerate in 2D.
pub const MIN_SEGMENT_2D_M: f64 = 1e-12;
/// 3D beams shorter than this are rejected outright.
pub const MIN_BEAM_3D_M: f64 = 1e-9;
/// Chords shorter than this are dropped; they arise when an endpoint or a
/// crossing lands exactly on a cell boundary.
const MIN_CHORD_M: f64 = 1e-12;

/// Discretization of the 2D measurement plane.
///
/// Cells are square with side `cell_size`, indexed `(i, j)` with
/// `0 <= i < nx`, `0 <= j < ny` and linear index `j * nx + i` (row-major).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub origin_x: f64,
    pub origin_y: f64,
    pub cell_size: f64,
    pub nx: usize,
    pub ny: usize,
    pub plane_height: f64,
}

impl GridSpec {
    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn linear_index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    /// Center of cell `(i, j)` on the plane.
    pub fn cell_center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.origin_x + (i as f64 + 0.5) * self.cell_size,
            self.origin_y + (j as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn max_x(&self) -> f64 {
        self.origin_x + self.nx as f64 * self.cell_size
    }

    pub fn max_y(&self) -> f64 {
        self.origin_y + self.ny as f64 * self.cell_size
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.origin_x && x <= self.max_x() && y >= self.origin_y && y <= self.max_y()
    }
}

/// A point in a local east-north-up frame (metres).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Position3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// One discretized beam: per-cell weights in metres plus the true 3D length.
///
/// Weights are the 2D chord lengths scaled by `L3D / L2D`, so that
/// `sum(weight_k * concentration_k)` integrates the field along the full 3D
/// path when the projected segment lies inside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRow {
    /// (linear cell index, weight in m), ordered along the beam.
    pub entries: Vec<(usize, f64)>,
    pub total_path_length_3d: f64,
}

impl SparseRow {
    pub fn weight_sum(&self) -> f64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Validates and builds a grid definition.
pub fn make_grid(
    origin_x: f64,
    origin_y: f64,
    cell_size: f64,
    nx: usize,
    ny: usize,
    plane_height: f64,
) -> Result<GridSpec> {
    if !cell_size.is_finite() || cell_size <= 0.0 {
        return Err(Error::InvalidGrid(format!(
            "cell_size must be positive, got {cell_size}"
        )));
    }
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidGrid(format!(
            "cell counts must be at least 1, got nx={nx}, ny={ny}"
        )));
    }
    if !origin_x.is_finite() || !origin_y.is_finite() || !plane_height.is_finite() {
        return Err(Error::InvalidGrid("origin and plane height must be finite".into()));
    }
    Ok(GridSpec {
        origin_x,
        origin_y,
        cell_size,
        nx,
        ny,
        plane_height,
    })
}

/// Clips segment `p0 + t * (p1 - p0)`, `t in [0, 1]`, to the grid bounding
/// box. Returns the parameter interval of the clipped segment, if any.
fn clip_to_grid(grid: &GridSpec, p0: (f64, f64), d: (f64, f64)) -> Option<(f64, f64)> {
    let mut t0 = 0.0f64;
    let mut t1 = 1.0f64;
    for (start, delta, lo, hi) in [
        (p0.0, d.0, grid.origin_x, grid.max_x()),
        (p0.1, d.1, grid.origin_y, grid.max_y()),
    ] {
        if delta == 0.0 {
            if start < lo || start > hi {
                return None;
            }
        } else {
            let ta = (lo - start) / delta;
            let tb = (hi - start) / delta;
            let (tmin, tmax) = if ta < tb { (ta, tb) } else { (tb, ta) };
            t0 = t0.max(tmin);
            t1 = t1.min(tmax);
            if t0 > t1 {
                return None;
            }
        }
    }
    Some((t0, t1))
}

/// Walks a 2D segment across the grid and returns exact per-cell chord
/// lengths, ordered from `p0` to `p1`. Cells outside the grid are omitted.
///
/// The segment is cut at every grid line it crosses; each resulting interval
/// is assigned to the cell containing its midpoint, which keeps endpoints
/// and crossings that sit exactly on a boundary unambiguous.
pub fn traverse(
    grid: &GridSpec,
    p0: (f64, f64),
    p1: (f64, f64),
) -> Result<Vec<((usize, usize), f64)>> {
    let d = (p1.0 - p0.0, p1.1 - p0.1);
    let len = (d.0 * d.0 + d.1 * d.1).sqrt();
    if len <= MIN_SEGMENT_2D_M {
        return Err(Error::DegenerateBeam);
    }

    let (t0, t1) = match clip_to_grid(grid, p0, d) {
        Some(span) => span,
        None => return Ok(Vec::new()),
    };
    if t1 - t0 <= 0.0 {
        return Ok(Vec::new());
    }

    // Parameters of every grid-line crossing inside (t0, t1).
    let mut ts = Vec::with_capacity(grid.nx + grid.ny + 4);
    ts.push(t0);
    ts.push(t1);
    if d.0 != 0.0 {
        for k in 0..=grid.nx {
            let t = (grid.origin_x + k as f64 * grid.cell_size - p0.0) / d.0;
            if t > t0 && t < t1 {
                ts.push(t);
            }
        }
    }
    if d.1 != 0.0 {
        for k in 0..=grid.ny {
            let t = (grid.origin_y + k as f64 * grid.cell_size - p0.1) / d.1;
            if t > t0 && t < t1 {
                ts.push(t);
            }
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut chords: Vec<((usize, usize), f64)> = Vec::with_capacity(ts.len());
    for pair in ts.windows(2) {
        let chord = (pair[1] - pair[0]) * len;
        if chord < MIN_CHORD_M {
            continue;
        }
        let tm = 0.5 * (pair[0] + pair[1]);
        let mx = p0.0 + tm * d.0;
        let my = p0.1 + tm * d.1;
        let i = (((mx - grid.origin_x) / grid.cell_size).floor() as isize)
            .clamp(0, grid.nx as isize - 1) as usize;
        let j = (((my - grid.origin_y) / grid.cell_size).floor() as isize)
            .clamp(0, grid.ny as isize - 1) as usize;
        match chords.last_mut() {
            Some((cell, w)) if *cell == (i, j) => *w += chord,
            _ => chords.push(((i, j), chord)),
        }
    }
    Ok(chords)
}

/// Maps a 3D open path onto the planar grid.
///
/// The 2D chords from [`traverse`] are scaled by `L3D / L2D` so the row
/// integrates concentration along the true path length.
pub fn beam_row(grid: &GridSpec, sensor: &Position3, reflector: &Position3) -> Result<SparseRow> {
    let l3d = sensor.distance(reflector);
    if l3d <= MIN_BEAM_3D_M {
        return Err(Error::DegenerateBeam);
    }
    let p0 = (sensor.x, sensor.y);
    let p1 = (reflector.x, reflector.y);
    let l2d = ((p1.0 - p0.0).powi(2) + (p1.1 - p0.1).powi(2)).sqrt();
    if l2d <= MIN_SEGMENT_2D_M {
        return Err(Error::VerticalBeam);
    }
    let scale = l3d / l2d;
    let chords = traverse(grid, p0, p1)?;
    let entries = chords
        .into_iter()
        .map(|((i, j), chord)| (grid.linear_index(i, j), chord * scale))
        .collect();
    Ok(SparseRow {
        entries,
        total_path_length_3d: l3d,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_grid_2x2() -> GridSpec {
        make_grid(0.0, 0.0, 1.0, 2, 2, 1.5).unwrap()
    }

    #[test]
    fn make_grid_validates_inputs() {
        let g = make_grid(0.0, 0.0, 1.0, 2, 2, 1.5).unwrap();
        assert_eq!(g.max_x(), 2.0);
        assert_eq!(g.max_y(), 2.0);
        assert_eq!(g.plane_height, 1.5);

        assert!(matches!(
            make_grid(0.0, 0.0, 0.0, 2, 2, 1.5),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(
            make_grid(0.0, 0.0, 1.0, 0, 2, 1.5),
            Err(Error::InvalidGrid(_))
        ));

        let g = make_grid(-5.0, -5.0, 0.5, 20, 20, 1.5).unwrap();
        assert_eq!(g.max_x(), 5.0);
        assert_eq!(g.max_y(), 5.0);
    }

    #[test]
    fn linear_index_is_row_major() {
        let g = make_grid(0.0, 0.0, 1.0, 4, 3, 1.5).unwrap();
        assert_eq!(g.linear_index(0, 0), 0);
        assert_eq!(g.linear_index(1, 0), 1);
        assert_eq!(g.linear_index(0, 1), 4);
        assert_eq!(g.linear_index(3, 2), 11);
    }

    #[test]
    fn traverse_axis_aligned_crossing() {
        let g = unit_grid_2x2();
        let chords = traverse(&g, (0.0, 0.5), (2.0, 0.5)).unwrap();
        assert_eq!(chords.len(), 2);
        assert_eq!(chords[0].0, (0, 0));
        assert_relative_eq!(chords[0].1, 1.0, max_relative = 1e-12);
        assert_eq!(chords[1].0, (1, 0));
        assert_relative_eq!(chords[1].1, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn traverse_diagonal_through_corner() {
        let g = unit_grid_2x2();
        let chords = traverse(&g, (0.0, 0.0), (2.0, 2.0)).unwrap();
        assert_eq!(chords.len(), 2);
        assert_eq!(chords[0].0, (0, 0));
        assert_relative_eq!(chords[0].1, 2f64.sqrt(), max_relative = 1e-12);
        assert_eq!(chords[1].0, (1, 1));
        assert_relative_eq!(chords[1].1, 2f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn traverse_outside_grid_is_empty() {
        let g = unit_grid_2x2();
        let chords = traverse(&g, (5.0, 5.0), (6.0, 6.0)).unwrap();
        assert!(chords.is_empty());
    }

    #[test]
    fn traverse_rejects_degenerate_segment() {
        let g = unit_grid_2x2();
        assert!(matches!(
            traverse(&g, (0.5, 0.5), (0.5, 0.5)),
            Err(Error::DegenerateBeam)
        ));
    }

    #[test]
    fn traverse_clips_partial_overlap() {
        let g = unit_grid_2x2();
        // Enters at x=0, leaves at x=2; only half the segment is inside.
        let chords = traverse(&g, (-1.0, 0.25), (3.0, 0.25)).unwrap();
        let total: f64 = chords.iter().map(|(_, w)| w).sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn beam_row_in_plane() {
        let g = unit_grid_2x2();
        let row = beam_row(
            &g,
            &Position3::new(0.0, 0.5, 1.5),
            &Position3::new(2.0, 0.5, 1.5),
        )
        .unwrap();
        assert_eq!(row.entries.len(), 2);
        assert_relative_eq!(row.entries[0].1, 1.0, max_relative = 1e-12);
        assert_relative_eq!(row.entries[1].1, 1.0, max_relative = 1e-12);
        assert_relative_eq!(row.total_path_length_3d, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn beam_row_scales_slanted_path() {
        // L3D = sqrt(8), L2D = 2, so each unit chord becomes sqrt(2).
        let g = unit_grid_2x2();
        let row = beam_row(
            &g,
            &Position3::new(0.0, 0.5, 0.0),
            &Position3::new(2.0, 0.5, 2.0),
        )
        .unwrap();
        assert_eq!(row.entries.len(), 2);
        for (_, w) in &row.entries {
            assert_relative_eq!(*w, 2f64.sqrt(), max_relative = 1e-12);
        }
        assert_relative_eq!(row.weight_sum(), row.total_path_length_3d, max_relative = 1e-12);
    }

    #[test]
    fn beam_row_rejects_vertical_beam() {
        let g = unit_grid_2x2();
        assert!(matches!(
            beam_row(
                &g,
                &Position3::new(1.0, 1.0, 0.0),
                &Position3::new(1.0, 1.0, 2.0)
            ),
            Err(Error::VerticalBeam)
        ));
    }

    #[test]
    fn beam_row_rejects_coincident_endpoints() {
        let g = unit_grid_2x2();
        assert!(matches!(
            beam_row(
                &g,
                &Position3::new(1.0, 1.0, 1.0),
                &Position3::new(1.0, 1.0, 1.0)
            ),
            Err(Error::DegenerateBeam)
        ));
    }

    #[test]
    fn endpoints_on_interior_boundary_produce_no_zero_chords() {
        let g = unit_grid_2x2();
        // Starts exactly on the interior grid line x = 1.
        let chords = traverse(&g, (1.0, 0.5), (2.0, 0.5)).unwrap();
        assert_eq!(chords.len(), 1);
        assert_eq!(chords[0].0, (1, 0));
        assert_relative_eq!(chords[0].1, 1.0, max_relative = 1e-12);
        for (_, w) in &chords {
            assert!(*w > 0.0);
        }
    }
}
