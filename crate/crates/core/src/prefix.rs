//! Summed-area tables for O(1) box sums.

use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::grid::{Cube, Grid, GridFunction, Rect};

/// Cumulative sums over `[0, i) × [0, j)` carried in double-double.
#[derive(Clone, Debug)]
pub struct PrefixTable {
    grid: Grid,
    stride: usize,
    table: Vec<Dd>,
}

impl PrefixTable {
    pub fn new(f: &GridFunction) -> PrefixTable {
        let values = f.values();
        PrefixTable::from_fn(*f.grid(), |k| values[k])
    }

    pub fn from_fn<F: Fn(usize) -> f64>(grid: Grid, value: F) -> PrefixTable {
        let stride = grid.cols() + 1;
        let mut table = PrefixTable { grid, stride, table: vec![Dd::ZERO; (grid.rows() + 1) * stride] };
        table.fill(value);
        table
    }

    /// Rebuilds the table in place for a new source on the same grid.
    pub(crate) fn fill<F: Fn(usize) -> f64>(&mut self, value: F) {
        let (rows, cols, stride) = (self.grid.rows(), self.grid.cols(), self.stride);
        for i in 0..rows {
            let mut running = Dd::ZERO;
            for j in 0..cols {
                running = running.add_f64(value(i * cols + j));
                self.table[(i + 1) * stride + j + 1] = self.table[i * stride + j + 1].add(running);
            }
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Dd {
        self.table[i * self.stride + j]
    }

    #[inline]
    pub(crate) fn box_sum_dd(&self, r: &Rect) -> Dd {
        self.at(r.r1, r.c1).sub(self.at(r.r0, r.c1)).sub(self.at(r.r1, r.c0)).add(self.at(r.r0, r.c0))
    }

    /// Sum of the source over an index rectangle (no bounds check beyond
    /// slice indexing).
    #[inline]
    pub fn box_sum(&self, r: &Rect) -> f64 {
        self.box_sum_dd(r).to_f64()
    }

    /// Arithmetic mean of the source over an index rectangle.
    #[inline]
    pub fn box_mean(&self, r: &Rect) -> f64 {
        self.box_sum_dd(r).div_f64(r.len() as f64)
    }

    pub fn cube_sum(&self, cube: &Cube) -> Result<f64> {
        Ok(self.box_sum(&self.grid.check_cube(cube)?))
    }

    pub fn cube_mean(&self, cube: &Cube) -> Result<f64> {
        Ok(self.box_mean(&self.grid.check_cube(cube)?))
    }

    /// Sum over the whole grid.
    pub fn total(&self) -> f64 {
        self.box_sum(&self.grid.full_rect())
    }
}

/// Mean of `f` over the lattice points of `cube`, read from a table built on `f`.
pub fn cube_mean(f: &GridFunction, cube: &Cube, via: &PrefixTable) -> Result<f64> {
    if f.grid() != via.grid() {
        return Err(Error::GridMismatch("prefix table built on another grid".into()));
    }
    via.cube_mean(cube)
}
