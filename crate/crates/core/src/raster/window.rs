use crate::error::{Error, Result};
use crate::raster::{Grid, PixelCoord};
use crate::scalar::Scalar;

/// Square moving window of Chebyshev radius `radius` (side `2r + 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    radius: usize,
}

impl Window {
    pub fn new(radius: usize) -> Result<Self> {
        if radius == 0 {
            return Err(Error::invalid("raster", "window radius must be >= 1"));
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }
}

/// One in-window cell seen from a window center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor<T> {
    pub coord: PixelCoord,
    pub value: T,
    /// Euclidean distance to the center in pixel units.
    pub distance: T,
}

/// Non-center, non-nodata cells of the window around `center`, row-major.
///
/// The window is truncated at the grid border; nothing is padded.
pub fn window_neighbors<T: Scalar>(
    grid: &Grid<T>,
    center: PixelCoord,
    window: Window,
) -> Result<Vec<Neighbor<T>>> {
    grid.check_in_bounds(center)?;
    let offsets = WindowOffsets::<T>::new(window);
    let mut out = Vec::with_capacity(offsets.len());
    offsets.for_each_valid(grid, center, |coord, value, offset| {
        out.push(Neighbor {
            coord,
            value,
            distance: offset.distance,
        });
    });
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
pub struct Offset<T> {
    pub drow: isize,
    pub dcol: isize,
    pub distance: T,
    pub inv_sq_distance: T,
}

/// Precomputed relative offsets of a window, excluding the center, in
/// row-major order. Kernels that visit every pixel reuse one table.
#[derive(Debug, Clone)]
pub struct WindowOffsets<T> {
    radius: usize,
    offsets: Vec<Offset<T>>,
}

impl<T: Scalar> WindowOffsets<T> {
    pub fn new(window: Window) -> Self {
        let r = window.radius() as isize;
        let mut offsets = Vec::with_capacity(((2 * r + 1) * (2 * r + 1) - 1) as usize);
        for drow in -r..=r {
            for dcol in -r..=r {
                if drow == 0 && dcol == 0 {
                    continue;
                }
                let sq = (drow * drow + dcol * dcol) as usize;
                let sq_t = T::of_usize(sq);
                offsets.push(Offset {
                    drow,
                    dcol,
                    distance: sq_t.sqrt(),
                    inv_sq_distance: sq_t.recip(),
                });
            }
        }
        Self {
            radius: window.radius(),
            offsets,
        }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Offset<T>> {
        self.offsets.iter()
    }

    /// Calls `f` for each in-bounds, non-nodata neighbor of `center`.
    #[inline]
    pub fn for_each_valid(
        &self,
        grid: &Grid<T>,
        center: PixelCoord,
        mut f: impl FnMut(PixelCoord, T, &Offset<T>),
    ) {
        let (nrows, ncols) = (grid.nrows() as isize, grid.ncols() as isize);
        let (r0, c0) = (center.row as isize, center.col as isize);
        let cells = grid.cells();
        let nodata = grid.nodata();
        for off in &self.offsets {
            let (r, c) = (r0 + off.drow, c0 + off.dcol);
            if r < 0 || c < 0 || r >= nrows || c >= ncols {
                continue;
            }
            let v = cells[(r * ncols + c) as usize];
            if v != nodata {
                f(PixelCoord::new(r as usize, c as usize), v, off);
            }
        }
    }
}
