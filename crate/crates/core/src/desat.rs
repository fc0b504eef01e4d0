//! Saturation correction: cells at the sensor ceiling (DN 63) are replaced
//! with `a * ln(DN_R) + b`, a logarithmic model of the radiance-calibrated
//! product fitted on unsaturated lit cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{Grid, PixelCoord, PixelMask};
use crate::regression::{fit_ols, LinearFit};
use crate::scalar::Scalar;

const MODULE: &str = "desaturation";

/// Raw DMSP-OLS stable-lights ceiling.
pub const SATURATION_DN: f64 = 63.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogModel<T> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> LogModel<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::invalid(MODULE, "log model coefficients must be finite"));
        }
        Ok(Self { a, b })
    }

    /// `a * ln(radiance) + b`. Radiance must be positive.
    pub fn eval(&self, radiance: T) -> T {
        self.a * radiance.ln() + self.b
    }
}

/// Which unsaturated cells feed the log-model regression.
///
/// A provisional fit is made on every candidate, then only the
/// `max_abs_diff_quantile` fraction with the smallest absolute residual is
/// kept, so cells where the two products disagree drop out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSelectionPolicy<T> {
    pub max_abs_diff_quantile: T,
    pub min_radiance: T,
}

impl<T: Scalar> Default for SampleSelectionPolicy<T> {
    fn default() -> Self {
        Self {
            max_abs_diff_quantile: T::of(0.9),
            min_radiance: T::of(1e-3),
        }
    }
}

impl<T: Scalar> SampleSelectionPolicy<T> {
    pub fn validate(&self) -> Result<()> {
        let q = self.max_abs_diff_quantile;
        if !(q > T::zero() && q <= T::one()) {
            return Err(Error::invalid(MODULE, format!("quantile must be in (0, 1], got {q}")));
        }
        if !(self.min_radiance > T::zero() && self.min_radiance.is_finite()) {
            return Err(Error::invalid(
                MODULE,
                format!("min_radiance must be > 0, got {}", self.min_radiance),
            ));
        }
        Ok(())
    }
}

/// Cells with data at or above `threshold`.
pub fn detect_saturated<T: Scalar>(grid: &Grid<T>, threshold: T) -> PixelMask {
    let bits = grid
        .cells()
        .iter()
        .map(|&v| !grid.is_nodata(v) && v >= threshold)
        .collect();
    PixelMask::new(grid.ncols(), grid.nrows(), bits).expect("grid dimensions are valid")
}

fn check_nonnegative<T: Scalar>(ntl: &Grid<T>) -> Result<()> {
    match ntl.valid_cells().find(|(_, v)| *v < T::zero()) {
        Some((_, v)) => Err(Error::Domain {
            module: MODULE,
            rule: "NTL DN must be >= 0",
            value: v.as_f64(),
        }),
        None => Ok(()),
    }
}

/// `(radiance, ntl)` sample pairs from unsaturated lit cells, trimmed by
/// residual rank per `policy`. Returned in row-major order.
pub fn select_saturation_samples<T: Scalar>(
    ntl: &Grid<T>,
    radiance: &Grid<T>,
    sat: &PixelMask,
    policy: &SampleSelectionPolicy<T>,
) -> Result<Vec<(T, T)>> {
    policy.validate()?;
    ntl.check_dims(radiance.ncols(), radiance.nrows(), "radiance vs ntl")?;
    ntl.check_dims(sat.ncols(), sat.nrows(), "saturation mask vs ntl")?;
    check_nonnegative(ntl)?;

    let candidates: Vec<(T, T)> = ntl
        .cells()
        .iter()
        .zip(radiance.cells())
        .zip(sat.bits())
        .filter(|((&n, &r), &s)| {
            !s && !ntl.is_nodata(n)
                && n > T::zero()
                && !radiance.is_nodata(r)
                && r >= policy.min_radiance
        })
        .map(|((&n, &r), _)| (r, n))
        .collect();
    if candidates.len() < 2 {
        return Err(Error::TooFewSamples {
            module: MODULE,
            needed: 2,
            got: candidates.len(),
        });
    }

    let provisional = fit_saturation_model(&candidates)?;
    let n = candidates.len();
    let keep = ((policy.max_abs_diff_quantile.as_f64() * n as f64 - 1e-9).ceil() as usize).clamp(1, n);

    let mut ranked: Vec<(usize, T)> = candidates
        .iter()
        .enumerate()
        .map(|(i, &(r, v))| (i, (v - provisional.eval(r)).abs()))
        .collect();
    ranked.sort_by(|x, y| x.1.partial_cmp(&y.1).expect("finite residuals").then(x.0.cmp(&y.0)));
    let mut kept: Vec<usize> = ranked[..keep].iter().map(|&(i, _)| i).collect();
    kept.sort_unstable();
    if kept.len() < 2 {
        return Err(Error::TooFewSamples {
            module: MODULE,
            needed: 2,
            got: kept.len(),
        });
    }
    Ok(kept.into_iter().map(|i| candidates[i]).collect())
}

/// OLS of DN on `ln(DN_R)`.
pub fn fit_saturation_model<T: Scalar>(samples: &[(T, T)]) -> Result<LogModel<T>> {
    fit_saturation_model_detailed(samples).map(|(m, _)| m)
}

pub fn fit_saturation_model_detailed<T: Scalar>(samples: &[(T, T)]) -> Result<(LogModel<T>, LinearFit<T>)> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            module: MODULE,
            needed: 2,
            got: samples.len(),
        });
    }
    if let Some(&(r, _)) = samples.iter().find(|(r, _)| !(*r > T::zero())) {
        return Err(Error::Domain {
            module: MODULE,
            rule: "radiance must be > 0",
            value: r.as_f64(),
        });
    }
    let xs: Vec<T> = samples.iter().map(|(r, _)| r.ln()).collect();
    let ys: Vec<T> = samples.iter().map(|&(_, v)| v).collect();
    let fit = fit_ols(&xs, &ys).map_err(|e| match e {
        Error::Degenerate { .. } => Error::degenerate(MODULE, "all sample radiances are identical"),
        other => other,
    })?;
    Ok((LogModel::new(fit.slope, fit.intercept)?, fit))
}

/// Replaces saturated cells with `max(0, a * ln(DN_R) + b)`.
///
/// Values above 63 are kept. Unsaturated cells are copied bit-for-bit.
pub fn apply_desaturation<T: Scalar>(
    ntl: &Grid<T>,
    radiance: &Grid<T>,
    sat: &PixelMask,
    model: &LogModel<T>,
) -> Result<Grid<T>> {
    ntl.check_dims(radiance.ncols(), radiance.nrows(), "radiance vs ntl")?;
    ntl.check_dims(sat.ncols(), sat.nrows(), "saturation mask vs ntl")?;
    check_nonnegative(ntl)?;

    let mut cells = ntl.cells().to_vec();
    let mut bad: Vec<PixelCoord> = Vec::new();
    for (i, cell) in cells.iter_mut().enumerate() {
        if !sat.bits()[i] || ntl.is_nodata(*cell) {
            continue;
        }
        let r = radiance.cells()[i];
        if radiance.is_nodata(r) || !(r > T::zero()) {
            bad.push(ntl.coord(i));
            continue;
        }
        *cell = model.eval(r).max(T::zero());
    }
    if !bad.is_empty() {
        return Err(Error::LogDomain(bad));
    }
    ntl.with_cells(cells)
}
