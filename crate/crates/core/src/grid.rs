//! Cell-centred square sampling window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest accepted side; sides must also be even.
pub const MIN_SIDE: usize = 32;
/// Grid sizes above this are refused; a single component would exceed 1 GiB.
pub const MAX_SIDE: usize = 8192;

/// `nx` x `ny` samples covering `[-half_width, half_width)` on both axes.
///
/// Sample `(i, j)` sits at the cell centre `x = (i - nx/2 + 1/2) dx`, so the
/// origin falls on a cell corner for even sizes. Data are stored row-major with
/// `j` (the y index) selecting the row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridSpec {
    nx: usize,
    ny: usize,
    half_width: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    nx: usize,
    ny: usize,
    half_width: f64,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = Error;
    fn try_from(r: RawGrid) -> Result<Self> {
        GridSpec::new(r.nx, r.ny, r.half_width)
    }
}

impl From<GridSpec> for RawGrid {
    fn from(g: GridSpec) -> Self {
        RawGrid { nx: g.nx, ny: g.ny, half_width: g.half_width }
    }
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, half_width: f64) -> Result<Self> {
        if nx < MIN_SIDE || ny < MIN_SIDE || !nx.is_multiple_of(2) || !ny.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!("sides must be even and at least {MIN_SIDE}, got {nx}x{ny}")));
        }
        if nx > MAX_SIDE || ny > MAX_SIDE {
            return Err(Error::InvalidGrid(format!("{nx}x{ny} exceeds {MAX_SIDE} per side")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half_width must be positive, got {half_width}")));
        }
        Ok(GridSpec { nx, ny, half_width })
    }

    /// 512 x 512 over [-8, 8).
    pub fn standard() -> Self {
        GridSpec { nx: 512, ny: 512, half_width: 8.0 }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_square(&self) -> bool {
        self.nx == self.ny
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * self.half_width / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - self.nx as f64 / 2.0 + 0.5) * self.dx()
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        (j as f64 - self.ny as f64 / 2.0 + 0.5) * self.dy()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Fractional sample coordinates of a physical point.
    #[inline]
    pub fn to_index_space(&self, x: f64, y: f64) -> (f64, f64) {
        (
            x / self.dx() + self.nx as f64 / 2.0 - 0.5,
            y / self.dy() + self.ny as f64 / 2.0 - 0.5,
        )
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x.abs() <= self.half_width && y.abs() <= self.half_width
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }

    /// Same shape, and half-widths equal to rounding (grids built from
    /// reciprocal pitches differ in the last few bits).
    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        let close = (self.half_width - other.half_width).abs() <= 1e-12 * self.half_width;
        if self.nx == other.nx && self.ny == other.ny && close {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{}x{} hw {} vs {}x{} hw {}",
                self.nx, self.ny, self.half_width, other.nx, other.ny, other.half_width
            )))
        }
    }
}
