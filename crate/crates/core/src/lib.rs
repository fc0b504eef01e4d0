//! Nighttime-light correction and sum-of-lights regression.
//!
//! The pipeline runs in three correction stages, each a closed-form fit
//! followed by a per-pixel map:
//!
//! 1. [`intercal`]: power-law intercalibration against a reference image over
//!    invariant regions, `DN_c + 1 = a (DN_m + 1)^b`.
//! 2. [`desat`]: replaces sensor-saturated cells (DN 63) with a logarithmic
//!    model of radiance-calibrated data, `DN = a ln(DN_R) + b`.
//! 3. [`debloom`]: fits an inverse-distance-squared spatial response on pseudo
//!    light pixels and subtracts the modelled spill-over.
//!
//! [`econ`] regresses GDP on the resulting sum of lights and scores
//! predictions; [`synth`] generates scenes from the forward models so every
//! fitter can be checked against known coefficients.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the CLI uses.

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod debloom;
pub mod desat;
pub mod econ;
pub mod error;
pub mod intercal;
pub mod raster;
pub mod regression;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type DnGrid = raster::Grid<f64>;
pub type DnGrid32 = raster::Grid<f32>;
pub type LinearFit = regression::LinearFit<f64>;
pub type PowerModel = intercal::PowerModel<f64>;
pub type LogModel = desat::LogModel<f64>;
pub type BloomModel = debloom::BloomModel<f64>;
pub type SampleSelectionPolicy = desat::SampleSelectionPolicy<f64>;
pub type PseudoPixelPolicy = debloom::PseudoPixelPolicy<f64>;
pub type AnnualSeries = econ::AnnualSeries<f64>;
pub type GdpModel = econ::GdpModel<f64>;

pub use raster::{PixelCoord, PixelMask, Window};
