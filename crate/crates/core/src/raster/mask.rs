use crate::error::{Error, Result};
use crate::raster::{Grid, PixelCoord};
use crate::scalar::Scalar;

/// Boolean raster aligned to a [`Grid`]: invariant regions, saturated cells,
/// pseudo light pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    ncols: usize,
    nrows: usize,
    bits: Vec<bool>,
}

impl PixelMask {
    pub fn new(ncols: usize, nrows: usize, bits: Vec<bool>) -> Result<Self> {
        if ncols == 0 || nrows == 0 || bits.len() != ncols * nrows {
            return Err(Error::InvalidGrid(format!(
                "mask of {} bits cannot be {ncols}x{nrows}",
                bits.len()
            )));
        }
        Ok(Self { ncols, nrows, bits })
    }

    pub fn new_empty(ncols: usize, nrows: usize) -> Self {
        Self {
            ncols,
            nrows,
            bits: vec![false; ncols * nrows],
        }
    }

    pub fn from_fn(ncols: usize, nrows: usize, mut f: impl FnMut(PixelCoord) -> bool) -> Self {
        let mut bits = Vec::with_capacity(ncols * nrows);
        for row in 0..nrows {
            for col in 0..ncols {
                bits.push(f(PixelCoord::new(row, col)));
            }
        }
        Self { ncols, nrows, bits }
    }

    /// Mask from a 0/1 grid; nodata reads as false.
    pub fn from_grid<T: Scalar>(grid: &Grid<T>) -> Result<Self> {
        let mut bits = Vec::with_capacity(grid.len());
        for (i, &v) in grid.cells().iter().enumerate() {
            let bit = if grid.is_nodata(v) || v == T::zero() {
                false
            } else if v == T::one() {
                true
            } else {
                let c = grid.coord(i);
                return Err(Error::InvalidGrid(format!(
                    "mask cell ({}, {}) is {v}, expected 0 or 1",
                    c.row, c.col
                )));
            };
            bits.push(bit);
        }
        Self::new(grid.ncols(), grid.nrows(), bits)
    }

    /// 0/1 grid with the default nodata sentinel.
    pub fn to_grid<T: Scalar>(&self) -> Grid<T> {
        let cells = self
            .bits
            .iter()
            .map(|&b| if b { T::one() } else { T::zero() })
            .collect();
        Grid::new(self.ncols, self.nrows, cells, T::of(super::DEFAULT_NODATA))
            .expect("mask dimensions are valid")
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, c: PixelCoord) -> bool {
        self.bits[c.row * self.ncols + c.col]
    }

    pub fn set(&mut self, c: PixelCoord, value: bool) {
        self.bits[c.row * self.ncols + c.col] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Coordinates of true cells in row-major order.
    pub fn iter_true(&self) -> impl Iterator<Item = PixelCoord> + '_ {
        let ncols = self.ncols;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| PixelCoord::new(i / ncols, i % ncols))
    }

    pub fn complement(&self) -> Self {
        Self {
            bits: self.bits.iter().map(|b| !b).collect(),
            ..self.clone()
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn is_disjoint(&self, other: &Self) -> Result<bool> {
        Ok(self.intersection(other)?.is_empty())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(bool, bool) -> bool) -> Result<Self> {
        if self.ncols != other.ncols || self.nrows != other.nrows {
            return Err(Error::DimensionMismatch {
                what: "mask vs mask",
                expected_cols: self.ncols,
                expected_rows: self.nrows,
                got_cols: other.ncols,
                got_rows: other.nrows,
            });
        }
        Ok(Self {
            ncols: self.ncols,
            nrows: self.nrows,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_algebra() {
        let a = PixelMask::from_fn(3, 2, |c| c.col == 0);
        let b = PixelMask::from_fn(3, 2, |c| c.col == 2);
        assert!(a.is_disjoint(&b).unwrap());
        assert_eq!(a.union(&b).unwrap().count(), 4);
        assert_eq!(a.complement().count(), 4);
        assert_eq!(
            a.iter_true().collect::<Vec<_>>(),
            vec![PixelCoord::new(0, 0), PixelCoord::new(1, 0)]
        );
        assert!(a.union(&PixelMask::new_empty(2, 2)).is_err());
    }

    #[test]
    fn grid_conversion() {
        let g = Grid::new(3, 1, vec![0.0, 1.0, -9999.0], -9999.0).unwrap();
        let m = PixelMask::from_grid(&g).unwrap();
        assert_eq!(m.bits(), &[false, true, false]);
        assert_eq!(m.to_grid::<f64>().cells(), &[0.0, 1.0, 0.0]);

        let bad = Grid::new(1, 1, vec![0.5], -9999.0).unwrap();
        assert!(PixelMask::from_grid(&bad).is_err());
    }
}
