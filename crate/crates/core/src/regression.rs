//! Closed-form simple linear regression and mean squared error.
//!
//! Every fitter in the crate reduces to this after a variable transform:
//! log-log for intercalibration, linear-log for desaturation, and the
//! inverse-distance feature for deblooming.

use crate::error::{Error, Result};
use crate::scalar::{compensated_sum, Scalar};

const MODULE: &str = "regression";

/// Result of an ordinary-least-squares line fit `y = intercept + slope * x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    /// Coefficient of determination, `1 - RSS/TSS`; 1 when the fit is exact.
    pub r2: T,
    /// `y_i - (intercept + slope * x_i)` in input order.
    pub residuals: Vec<T>,
    pub n: usize,
}

impl<T: Scalar> LinearFit<T> {
    pub fn predict(&self, x: T) -> T {
        self.intercept + self.slope * x
    }

    pub fn rss(&self) -> T {
        compensated_sum(self.residuals.iter().map(|&e| e * e))
    }
}

/// Fits `ys ~ intercept + slope * xs` via the centered normal equations.
pub fn fit_ols<T: Scalar>(xs: &[T], ys: &[T]) -> Result<LinearFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            module: MODULE,
            left: xs.len(),
            right: ys.len(),
        });
    }
    let n = xs.len();
    if n < 2 {
        return Err(Error::TooFewSamples {
            module: MODULE,
            needed: 2,
            got: n,
        });
    }
    if let Some(v) = xs.iter().chain(ys).find(|v| !v.is_finite()) {
        return Err(Error::Domain {
            module: MODULE,
            rule: "samples must be finite",
            value: v.as_f64(),
        });
    }

    let nt = T::of_usize(n);
    let x_mean = compensated_sum(xs.iter().copied()) / nt;
    let y_mean = compensated_sum(ys.iter().copied()) / nt;

    let sxx = compensated_sum(xs.iter().map(|&x| (x - x_mean) * (x - x_mean)));
    if sxx == T::zero() || xs.iter().all(|&x| x == xs[0]) {
        return Err(Error::degenerate(MODULE, "zero variance in predictor"));
    }
    let sxy = compensated_sum(
        xs.iter()
            .zip(ys)
            .map(|(&x, &y)| (x - x_mean) * (y - y_mean)),
    );

    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let residuals: Vec<T> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| y - (intercept + slope * x))
        .collect();

    let rss = compensated_sum(residuals.iter().map(|&e| e * e));
    let tss = compensated_sum(ys.iter().map(|&y| (y - y_mean) * (y - y_mean)));
    let r2 = if rss == T::zero() {
        T::one()
    } else if tss == T::zero() {
        return Err(Error::degenerate(
            MODULE,
            "constant response with nonzero residuals; r2 undefined",
        ));
    } else {
        (T::one() - rss / tss).max(T::zero()).min(T::one())
    };

    Ok(LinearFit {
        slope,
        intercept,
        r2,
        residuals,
        n,
    })
}

/// Mean squared error `(1/n) * sum((actual_i - predicted_i)^2)`.
pub fn mse<T: Scalar>(actual: &[T], predicted: &[T]) -> Result<T> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            module: MODULE,
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::TooFewSamples {
            module: MODULE,
            needed: 1,
            got: 0,
        });
    }
    let sse = compensated_sum(
        actual
            .iter()
            .zip(predicted)
            .map(|(&a, &p)| (a - p) * (a - p)),
    );
    Ok(sse / T::of_usize(actual.len()))
}
