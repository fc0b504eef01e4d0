//! Blooming correction.
//!
//! Light from bright sources spills into neighbouring pixels. A lit pixel
//! that borders dark background (a "pseudo light pixel") is assumed to carry
//! no light of its own, so its value samples the spill-over directly. The
//! spill is modelled as an inverse-distance-squared response,
//!
//! ```text
//! R' = a * sum_i R_i / d_i^2 + b
//! ```
//!
//! over the genuine sources `R_i` inside a square moving window, fitted on the
//! pseudo pixels and then subtracted from every lit pixel.
//!
//! Neighbours at or below the model's `source_floor` are left out of the sum:
//! they are themselves spill-over candidates, and counting them would feed
//! the blooming signal back into its own regressor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{Grid, PixelCoord, PixelMask, Window, WindowOffsets};
use crate::regression::{fit_ols, LinearFit};
use crate::scalar::{CompensatedSum, Scalar};

const MODULE: &str = "deblooming";

/// Moving-window radius used when none is configured.
pub const DEFAULT_RADIUS: usize = 5;

/// Thresholds deciding which lit pixels are pseudo light pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoPixelPolicy<T> {
    /// Cells at or below this are background.
    pub background_max: T,
    /// Lit cells above this are genuine sources, never pseudo.
    pub pseudo_max_dn: T,
    /// Required background cells among the (up to) 8 neighbours.
    pub min_background_neighbors: usize,
}

impl<T: Scalar> Default for PseudoPixelPolicy<T> {
    fn default() -> Self {
        Self {
            background_max: T::zero(),
            pseudo_max_dn: T::of(10.0),
            min_background_neighbors: 5,
        }
    }
}

impl<T: Scalar> PseudoPixelPolicy<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.background_max >= T::zero()) || !(self.background_max < self.pseudo_max_dn) {
            return Err(Error::invalid(
                MODULE,
                format!(
                    "need 0 <= background_max < pseudo_max_dn, got {} and {}",
                    self.background_max, self.pseudo_max_dn
                ),
            ));
        }
        if !(1..=8).contains(&self.min_background_neighbors) {
            return Err(Error::invalid(
                MODULE,
                format!(
                    "min_background_neighbors must be in 1..=8, got {}",
                    self.min_background_neighbors
                ),
            ));
        }
        Ok(())
    }
}

/// Fitted spatial response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BloomModel<T> {
    pub a: T,
    pub b: T,
    pub radius: usize,
    /// Neighbours must exceed this to count as sources in the response sum.
    pub source_floor: T,
}

impl<T: Scalar> BloomModel<T> {
    pub fn new(a: T, b: T, radius: usize, source_floor: T) -> Result<Self> {
        Window::new(radius)?;
        if !(a.is_finite() && b.is_finite() && source_floor.is_finite()) {
            return Err(Error::invalid(MODULE, "bloom model coefficients must be finite"));
        }
        Ok(Self {
            a,
            b,
            radius,
            source_floor,
        })
    }

    /// Model that removes nothing.
    pub fn null(radius: usize) -> Result<Self> {
        Self::new(T::zero(), T::zero(), radius, T::zero())
    }

    /// Estimated blooming contribution at `center` of `grid`.
    pub fn predict(&self, grid: &Grid<T>, center: PixelCoord) -> Result<T> {
        let offsets = WindowOffsets::new(Window::new(self.radius)?);
        grid.check_in_bounds(center)?;
        Ok(self.a * response_sum(grid, center, &offsets, Some(self.source_floor)) + self.b)
    }
}

/// Lit pixels within `(background_max, pseudo_max_dn]` having at least
/// `min_background_neighbors` background cells among their existing
/// 8-neighbours.
pub fn detect_pseudo_light<T: Scalar>(grid: &Grid<T>, policy: &PseudoPixelPolicy<T>) -> Result<PixelMask> {
    policy.validate()?;
    let ring = WindowOffsets::<T>::new(Window::new(1)?);
    let mut mask = PixelMask::new_empty(grid.ncols(), grid.nrows());
    for (c, v) in grid.valid_cells() {
        if !(v > policy.background_max && v <= policy.pseudo_max_dn) {
            continue;
        }
        let mut background = 0;
        ring.for_each_valid(grid, c, |_, n, _| {
            if n <= policy.background_max {
                background += 1;
            }
        });
        if background >= policy.min_background_neighbors {
            mask.set(c, true);
        }
    }
    Ok(mask)
}

fn response_sum<T: Scalar>(
    grid: &Grid<T>,
    center: PixelCoord,
    offsets: &WindowOffsets<T>,
    floor: Option<T>,
) -> T {
    let mut acc = CompensatedSum::new();
    offsets.for_each_valid(grid, center, |_, v, off| {
        if floor.is_none_or(|f| v > f) {
            acc.add(v * off.inv_sq_distance);
        }
    });
    acc.value()
}

/// `sum R_i / d_i^2` over every non-center, non-nodata cell in the window.
pub fn bloom_feature<T: Scalar>(grid: &Grid<T>, center: PixelCoord, radius: usize) -> Result<T> {
    let offsets = WindowOffsets::new(Window::new(radius)?);
    grid.check_in_bounds(center)?;
    Ok(response_sum(grid, center, &offsets, None))
}

/// Like [`bloom_feature`] but only neighbours strictly above `source_floor`
/// contribute.
pub fn source_feature<T: Scalar>(
    grid: &Grid<T>,
    center: PixelCoord,
    radius: usize,
    source_floor: T,
) -> Result<T> {
    let offsets = WindowOffsets::new(Window::new(radius)?);
    grid.check_in_bounds(center)?;
    Ok(response_sum(grid, center, &offsets, Some(source_floor)))
}

/// Regression samples `(feature, observed)` at the pseudo pixels.
pub fn bloom_samples<T: Scalar>(
    grid: &Grid<T>,
    pseudo: &PixelMask,
    radius: usize,
    source_floor: T,
) -> Result<Vec<(PixelCoord, T, T)>> {
    grid.check_dims(pseudo.ncols(), pseudo.nrows(), "pseudo mask vs grid")?;
    let offsets = WindowOffsets::new(Window::new(radius)?);
    Ok(pseudo
        .iter_true()
        .filter_map(|c| grid.value(c).map(|v| (c, v)))
        .map(|(c, v)| (c, response_sum(grid, c, &offsets, Some(source_floor)), v))
        .collect())
}

/// OLS of observed pseudo-pixel DN on the source response.
pub fn fit_bloom_model<T: Scalar>(
    grid: &Grid<T>,
    pseudo: &PixelMask,
    radius: usize,
    source_floor: T,
) -> Result<BloomModel<T>> {
    fit_bloom_model_detailed(grid, pseudo, radius, source_floor).map(|(m, _)| m)
}

pub fn fit_bloom_model_detailed<T: Scalar>(
    grid: &Grid<T>,
    pseudo: &PixelMask,
    radius: usize,
    source_floor: T,
) -> Result<(BloomModel<T>, LinearFit<T>)> {
    let samples = bloom_samples(grid, pseudo, radius, source_floor)?;
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            module: MODULE,
            needed: 2,
            got: samples.len(),
        });
    }
    let xs: Vec<T> = samples.iter().map(|s| s.1).collect();
    let ys: Vec<T> = samples.iter().map(|s| s.2).collect();
    let fit = fit_ols(&xs, &ys).map_err(|e| match e {
        Error::Degenerate { .. } => {
            Error::degenerate(MODULE, "pseudo pixels share a single response value")
        }
        other => other,
    })?;
    let model = BloomModel::new(fit.slope, fit.intercept, radius, source_floor)?;
    Ok((model, fit))
}

/// Subtracts the modelled blooming from every lit cell, clamping at zero.
///
/// The response is evaluated on the input grid in a single pass; background
/// (`<= 0`) and nodata cells are copied through.
pub fn apply_debloom<T: Scalar>(grid: &Grid<T>, model: &BloomModel<T>) -> Result<Grid<T>> {
    let offsets = WindowOffsets::new(Window::new(model.radius)?);
    Ok(grid.map_valid(|c, v| {
        if v <= T::zero() {
            return v;
        }
        let bloom = model.a * response_sum(grid, c, &offsets, Some(model.source_floor)) + model.b;
        (v - bloom).max(T::zero())
    }))
}
