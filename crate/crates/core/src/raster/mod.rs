//! Raster data model: grids of digital numbers, boolean masks, moving
//! windows and the plain-text grid codec.

mod ascii;
mod mask;
mod window;

pub use ascii::{read_grid, read_mask, write_grid, write_mask};
pub use mask::PixelMask;
pub use window::{window_neighbors, Neighbor, Window, WindowOffsets};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Scalar};

/// Nodata sentinel used when a grid is built without one.
pub const DEFAULT_NODATA: f64 = -9999.0;

/// 0-based (row, col) position in a grid. Row 0 is the first row written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PixelCoord {
    pub row: usize,
    pub col: usize,
}

impl PixelCoord {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Georeferencing header fields. Carried through I/O untouched, never interpreted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoRef {
    pub xllcorner: f64,
    pub yllcorner: f64,
    pub cellsize: f64,
}

impl Default for GeoRef {
    fn default() -> Self {
        Self {
            xllcorner: 0.0,
            yllcorner: 0.0,
            cellsize: 1.0,
        }
    }
}

/// Rectangular raster of digital numbers stored row-major.
///
/// A cell holding exactly the `nodata` value is missing; every other cell is
/// finite. Grids are immutable once built: every operation returns a new one.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    ncols: usize,
    nrows: usize,
    cells: Vec<T>,
    nodata: T,
    georef: GeoRef,
}

impl<T: Scalar> Grid<T> {
    pub fn new(ncols: usize, nrows: usize, cells: Vec<T>, nodata: T) -> Result<Self> {
        if ncols == 0 || nrows == 0 {
            return Err(Error::InvalidGrid(format!(
                "dimensions must be positive, got {ncols}x{nrows}"
            )));
        }
        if cells.len() != ncols * nrows {
            return Err(Error::InvalidGrid(format!(
                "{} cells for a {ncols}x{nrows} grid",
                cells.len()
            )));
        }
        if !nodata.is_finite() {
            return Err(Error::InvalidGrid("nodata sentinel must be finite".into()));
        }
        if let Some(i) = cells.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "non-finite value at ({}, {})",
                i / ncols,
                i % ncols
            )));
        }
        Ok(Self {
            ncols,
            nrows,
            cells,
            nodata,
            georef: GeoRef::default(),
        })
    }

    /// Grid with every cell set to `value` and the default nodata sentinel.
    pub fn filled(ncols: usize, nrows: usize, value: T) -> Result<Self> {
        Self::new(ncols, nrows, vec![value; ncols * nrows], T::of(DEFAULT_NODATA))
    }

    pub fn from_fn(
        ncols: usize,
        nrows: usize,
        mut f: impl FnMut(PixelCoord) -> T,
    ) -> Result<Self> {
        let mut cells = Vec::with_capacity(ncols * nrows);
        for row in 0..nrows {
            for col in 0..ncols {
                cells.push(f(PixelCoord::new(row, col)));
            }
        }
        Self::new(ncols, nrows, cells, T::of(DEFAULT_NODATA))
    }

    pub fn with_georef(mut self, georef: GeoRef) -> Self {
        self.georef = georef;
        self
    }

    pub fn with_nodata(mut self, nodata: T) -> Self {
        self.nodata = nodata;
        self
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn nodata(&self) -> T {
        self.nodata
    }

    pub fn georef(&self) -> GeoRef {
        self.georef
    }

    pub fn cells(&self) -> &[T] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<T> {
        self.cells
    }

    pub fn contains(&self, c: PixelCoord) -> bool {
        c.row < self.nrows && c.col < self.ncols
    }

    pub fn index(&self, c: PixelCoord) -> usize {
        c.row * self.ncols + c.col
    }

    pub fn coord(&self, index: usize) -> PixelCoord {
        PixelCoord::new(index / self.ncols, index % self.ncols)
    }

    /// Raw cell value, nodata included. Panics outside the grid.
    pub fn get(&self, c: PixelCoord) -> T {
        self.cells[self.index(c)]
    }

    /// Cell value, or `None` for nodata.
    pub fn value(&self, c: PixelCoord) -> Option<T> {
        let v = self.get(c);
        (!self.is_nodata(v)).then_some(v)
    }

    pub fn is_nodata(&self, v: T) -> bool {
        v == self.nodata
    }

    pub fn check_in_bounds(&self, c: PixelCoord) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                row: c.row,
                col: c.col,
                ncols: self.ncols,
                nrows: self.nrows,
            })
        }
    }

    pub(crate) fn check_dims(&self, ncols: usize, nrows: usize, what: &'static str) -> Result<()> {
        if self.ncols == ncols && self.nrows == nrows {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                what,
                expected_cols: self.ncols,
                expected_rows: self.nrows,
                got_cols: ncols,
                got_rows: nrows,
            })
        }
    }

    /// Iterator over `(coord, value)` for every non-nodata cell, row-major.
    pub fn valid_cells(&self) -> impl Iterator<Item = (PixelCoord, T)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, v)| !self.is_nodata(**v))
            .map(|(i, v)| (self.coord(i), *v))
    }

    /// Same-shape grid with `f` applied to every non-nodata cell; nodata
    /// propagates. Rows are processed in parallel, output order is row-major.
    pub fn map_valid<F>(&self, f: F) -> Self
    where
        F: Fn(PixelCoord, T) -> T + Sync,
    {
        let mut cells = self.cells.clone();
        let nodata = self.nodata;
        cells
            .par_chunks_mut(self.ncols)
            .enumerate()
            .for_each(|(row, chunk)| {
                for (col, v) in chunk.iter_mut().enumerate() {
                    if *v != nodata {
                        *v = f(PixelCoord::new(row, col), *v);
                    }
                }
            });
        Self {
            cells,
            ..self.clone_header()
        }
    }

    /// Copy of the grid with a replaced cell buffer. The buffer must keep the
    /// shape and finiteness invariants.
    pub(crate) fn with_cells(&self, cells: Vec<T>) -> Result<Self> {
        Grid::new(self.ncols, self.nrows, cells, self.nodata).map(|g| g.with_georef(self.georef))
    }

    fn clone_header(&self) -> Self {
        Self {
            ncols: self.ncols,
            nrows: self.nrows,
            cells: Vec::new(),
            nodata: self.nodata,
            georef: self.georef,
        }
    }

    /// Converts the cell type, e.g. to run the f32 kernels on an f64 grid.
    pub fn cast<U: Scalar>(&self) -> Grid<U> {
        Grid {
            ncols: self.ncols,
            nrows: self.nrows,
            cells: self.cells.iter().map(|v| U::of(v.as_f64())).collect(),
            nodata: U::of(self.nodata.as_f64()),
            georef: self.georef,
        }
    }
}

/// Sum of all non-nodata cells, optionally restricted to mask-true cells.
///
/// Accumulates in row-major order with compensation, so repeated calls on the
/// same input return bit-identical results.
pub fn sum_of_lights<T: Scalar>(grid: &Grid<T>, mask: Option<&PixelMask>) -> Result<T> {
    if let Some(m) = mask {
        grid.check_dims(m.ncols(), m.nrows(), "mask vs grid")?;
    }
    let mut acc = CompensatedSum::new();
    for (i, &v) in grid.cells().iter().enumerate() {
        if grid.is_nodata(v) {
            continue;
        }
        if mask.is_some_and(|m| !m.bits()[i]) {
            continue;
        }
        acc.add(v);
    }
    Ok(acc.value())
}

/// Mean of the non-nodata cells selected by `mask` (all when `None`).
pub fn mean_of_lights<T: Scalar>(grid: &Grid<T>, mask: Option<&PixelMask>) -> Result<T> {
    let total = sum_of_lights(grid, mask)?;
    let n = grid
        .cells()
        .iter()
        .enumerate()
        .filter(|(i, v)| !grid.is_nodata(**v) && mask.is_none_or(|m| m.bits()[*i]))
        .count();
    if n == 0 {
        return Err(Error::degenerate("raster", "no valid cells to average"));
    }
    Ok(total / T::of_usize(n))
}

/// `(pending, reference)` value pairs at mask-true cells where both grids
/// hold data, in row-major order.
pub fn extract_pairs<T: Scalar>(
    pending: &Grid<T>,
    reference: &Grid<T>,
    mask: &PixelMask,
) -> Result<Vec<(T, T)>> {
    pending.check_dims(reference.ncols(), reference.nrows(), "reference vs pending")?;
    pending.check_dims(mask.ncols(), mask.nrows(), "mask vs pending")?;
    Ok(pending
        .cells()
        .iter()
        .zip(reference.cells())
        .zip(mask.bits())
        .filter(|((&p, &r), &m)| m && !pending.is_nodata(p) && !reference.is_nodata(r))
        .map(|((&p, &r), _)| (p, r))
        .collect())
}
