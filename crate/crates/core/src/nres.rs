//! Square grids of mutually exclusive receptive fields over the arena.
//!
//! Cells are half-open `[lo, hi)` on each axis, except that the upper arena
//! boundary belongs to the last row/column. Coordinates outside the bounds are
//! clamped first, so every point in the plane addresses exactly one cell.
//! Indices are row-major with row 0 at the southern edge: `index = row * N + col`.

use crate::error::{Error, Result};
use crate::geom::{Rect, Vec2};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex(pub usize);

impl fmt::Display for CellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NresGrid {
    resolution: usize,
    bounds: Rect,
}

impl NresGrid {
    pub fn new(resolution: usize, bounds: Rect) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::config("resolution", "must be at least 1"));
        }
        if !bounds.is_proper() {
            return Err(Error::config(
                "bounds",
                format!("need positive width and height, got {bounds:?}"),
            ));
        }
        Ok(Self { resolution, bounds })
    }

    /// Cells per axis.
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn cell_count(&self) -> usize {
        self.resolution * self.resolution
    }

    pub fn cell_of(&self, coord: Vec2) -> CellIndex {
        let n = self.resolution;
        let axis = |v: f64, lo: f64, span: f64| -> usize {
            let t = ((v - lo) / span).clamp(0.0, 1.0);
            // NaN falls through `as` to 0
            ((t * n as f64) as usize).min(n - 1)
        };
        let col = axis(coord.x, self.bounds.min.x, self.bounds.width());
        let row = axis(coord.y, self.bounds.min.y, self.bounds.height());
        CellIndex(row * n + col)
    }

    /// `(row, col)` of a valid cell.
    pub fn row_col(&self, cell: CellIndex) -> Result<(usize, usize)> {
        self.check(cell)?;
        Ok((cell.0 / self.resolution, cell.0 % self.resolution))
    }

    pub fn cell_center(&self, cell: CellIndex) -> Result<Vec2> {
        let (row, col) = self.row_col(cell)?;
        let n = self.resolution as f64;
        Ok(Vec2::new(
            self.bounds.min.x + (col as f64 + 0.5) * self.bounds.width() / n,
            self.bounds.min.y + (row as f64 + 0.5) * self.bounds.height() / n,
        ))
    }

    /// Grids over the same Euclidean space. Resolutions may differ.
    pub fn compatible(&self, other: &NresGrid) -> bool {
        self.bounds == other.bounds
    }

    pub fn check(&self, cell: CellIndex) -> Result<()> {
        if cell.0 < self.cell_count() {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                what: "grid cells",
                index: cell.0,
                len: self.cell_count(),
            })
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = CellIndex> {
        (0..self.cell_count()).map(CellIndex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(n: usize) -> NresGrid {
        NresGrid::new(n, Rect::unit()).unwrap()
    }

    #[test]
    fn construction() {
        assert_eq!(unit(3).cell_count(), 9);
        assert_eq!(unit(1).cell_count(), 1);
        assert!(NresGrid::new(0, Rect::unit()).is_err());
        let inverted = Rect::new(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0));
        assert!(NresGrid::new(3, inverted).is_err());
    }

    #[test]
    fn cell_lookup() {
        let g = unit(3);
        assert_eq!(g.cell_of(Vec2::new(0.5, 0.5)), CellIndex(4));
        assert_eq!(g.cell_of(Vec2::new(0.0, 0.0)), CellIndex(0));
        assert_eq!(g.cell_of(Vec2::new(1.0, 1.0)), CellIndex(8));
        assert_eq!(g.cell_of(Vec2::new(0.9, 0.1)), CellIndex(2));
        assert_eq!(g.cell_of(Vec2::new(0.1, 0.9)), CellIndex(6));
        // clamped
        assert_eq!(g.cell_of(Vec2::new(-3.0, 7.0)), CellIndex(6));
        assert_eq!(g.cell_of(Vec2::new(f64::NAN, 0.5)), CellIndex(3));
    }

    #[test]
    fn half_open_edges() {
        let g = unit(2);
        assert_eq!(g.cell_of(Vec2::new(0.5, 0.0)), CellIndex(1));
        assert_eq!(g.cell_of(Vec2::new(0.4999999, 0.0)), CellIndex(0));
    }

    #[test]
    fn centers() {
        assert_eq!(unit(1).cell_center(CellIndex(0)).unwrap(), Vec2::new(0.5, 0.5));
        assert_eq!(unit(3).cell_center(CellIndex(4)).unwrap(), Vec2::new(0.5, 0.5));
        assert!(unit(3).cell_center(CellIndex(9)).is_err());
    }

    #[test]
    fn center_round_trip() {
        let wide = Rect::new(Vec2::new(-1.0, 2.0), Vec2::new(1.5, 2.75));
        for n in [1, 3, 7, 23] {
            for bounds in [Rect::unit(), wide] {
                let g = NresGrid::new(n, bounds).unwrap();
                for c in g.cells() {
                    assert_eq!(g.cell_of(g.cell_center(c).unwrap()), c, "n={n}");
                }
            }
        }
    }

    #[test]
    fn compatibility() {
        let a = unit(7);
        assert!(a.compatible(&unit(23)));
        assert!(a.compatible(&a));
        let b = NresGrid::new(7, Rect::sized(2.0, 1.0)).unwrap();
        assert!(!a.compatible(&b));
        assert!(!b.compatible(&a));
    }
}
