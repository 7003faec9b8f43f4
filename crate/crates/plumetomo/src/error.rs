//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Beam endpoints coincide (3D length below 1e-9 m, or 2D below 1e-12 m).
    #[error("degenerate beam: endpoints coincide")]
    DegenerateBeam,

    /// Beam is vertical: its 2D projection has zero length, so it cannot be
    /// mapped onto the horizontal reconstruction plane.
    #[error("vertical beam: zero-length 2D projection")]
    VerticalBeam,

    /// No wind sample inside the averaging window and none close enough to
    /// fall back on.
    #[error("wind gap: no wind sample within {max_gap_s} s of the window ending at t={t} s")]
    WindGap { t: f64, max_gap_s: f64 },

    /// Every beam missed the reconstruction grid.
    #[error("empty system: no beam intersects the grid")]
    EmptySystem,

    #[error("system mismatch: {0}")]
    SystemMismatch(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// The field has no unique maximum (constant map).
    #[error("undefined argmax: field is constant")]
    UndefinedArgmax,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: parse error: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("{path}:{line}: validation error: {msg}")]
    Validation {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
