//! Power-law intercalibration of a pending image against a reference image
//! over invariant regions: `DN_c + 1 = a * (DN_m + 1)^b`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Grid;
use crate::regression::{fit_ols, LinearFit};
use crate::scalar::Scalar;

const MODULE: &str = "intercalibration";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel<T> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> PowerModel<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a <= T::zero() {
            return Err(Error::invalid(
                MODULE,
                format!("power model needs finite a > 0 and finite b, got a={a}, b={b}"),
            ));
        }
        Ok(Self { a, b })
    }

    pub fn identity() -> Self {
        Self {
            a: T::one(),
            b: T::one(),
        }
    }

    /// `a * (v + 1)^b - 1`, without clamping.
    pub fn eval(&self, v: T) -> T {
        self.a * (v + T::one()).powf(self.b) - T::one()
    }
}

/// Fitted model plus the log-log regression it came from.
#[derive(Debug, Clone)]
pub struct IntercalibrationFit<T> {
    pub model: PowerModel<T>,
    pub log_fit: LinearFit<T>,
}

/// Fits the power model by OLS of `ln(DN_c + 1)` on `ln(DN_m + 1)`.
///
/// `pairs` are `(pending, reference)` values, e.g. from
/// [`extract_pairs`](crate::raster::extract_pairs).
pub fn fit_intercalibration<T: Scalar>(pairs: &[(T, T)]) -> Result<PowerModel<T>> {
    fit_intercalibration_detailed(pairs).map(|f| f.model)
}

pub fn fit_intercalibration_detailed<T: Scalar>(pairs: &[(T, T)]) -> Result<IntercalibrationFit<T>> {
    if pairs.len() < 2 {
        return Err(Error::TooFewSamples {
            module: MODULE,
            needed: 2,
            got: pairs.len(),
        });
    }
    let mut xs = Vec::with_capacity(pairs.len());
    let mut ys = Vec::with_capacity(pairs.len());
    for &(m, c) in pairs {
        for v in [m, c] {
            if !(v + T::one() > T::zero()) {
                return Err(Error::Domain {
                    module: MODULE,
                    rule: "DN + 1 must be positive",
                    value: v.as_f64(),
                });
            }
        }
        xs.push((m + T::one()).ln());
        ys.push((c + T::one()).ln());
    }
    let log_fit = fit_ols(&xs, &ys).map_err(|e| match e {
        Error::Degenerate { .. } => {
            Error::degenerate(MODULE, "all pending DN values are identical")
        }
        other => other,
    })?;
    let model = PowerModel::new(log_fit.intercept.exp(), log_fit.slope)?;
    Ok(IntercalibrationFit { model, log_fit })
}

/// Maps every data cell through the power model, clamping at zero.
pub fn apply_intercalibration<T: Scalar>(grid: &Grid<T>, model: &PowerModel<T>) -> Result<Grid<T>> {
    if let Some((_, v)) = grid.valid_cells().find(|(_, v)| *v < T::zero()) {
        return Err(Error::Domain {
            module: MODULE,
            rule: "input DN must be >= 0",
            value: v.as_f64(),
        });
    }
    Ok(grid.map_valid(|_, v| model.eval(v).max(T::zero())))
}
