use std::path::PathBuf;

use thiserror::Error;

use crate::raster::PixelCoord;

/// Errors raised by the correction toolkit.
///
/// Messages name the module whose rule was violated so that the CLI can
/// surface them unchanged.
#[derive(Debug, Error)]
pub enum Error {
    #[error("raster: parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("raster: dimension mismatch ({what}): expected {expected_cols}x{expected_rows}, got {got_cols}x{got_rows}")]
    DimensionMismatch {
        what: &'static str,
        expected_cols: usize,
        expected_rows: usize,
        got_cols: usize,
        got_rows: usize,
    },

    #[error("raster: invalid grid: {0}")]
    InvalidGrid(String),

    #[error("raster: coordinate ({row}, {col}) outside {ncols}x{nrows} grid")]
    OutOfBounds {
        row: usize,
        col: usize,
        ncols: usize,
        nrows: usize,
    },

    #[error("{module}: length mismatch ({left} vs {right})")]
    LengthMismatch {
        module: &'static str,
        left: usize,
        right: usize,
    },

    #[error("{module}: need at least {needed} samples, got {got}")]
    TooFewSamples {
        module: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("{module}: degenerate design ({reason})")]
    Degenerate {
        module: &'static str,
        reason: String,
    },

    #[error("{module}: value {value} outside domain ({rule})")]
    Domain {
        module: &'static str,
        rule: &'static str,
        value: f64,
    },

    #[error("desaturation: log-domain violation (radiance <= 0 or nodata) at saturated cells {}", format_coords(.0))]
    LogDomain(Vec<PixelCoord>),

    #[error("{module}: invalid parameter: {message}")]
    InvalidParameter {
        module: &'static str,
        message: String,
    },

    #[error("econometrics: series have no years in common")]
    EmptyIntersection,

    #[error("econometrics: base year {0} not present in series")]
    MissingBaseYear(i32),

    #[error("econometrics: base-year value is zero")]
    ZeroBase,

    #[error("econometrics: {0}")]
    Series(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn degenerate(module: &'static str, reason: impl Into<String>) -> Self {
        Error::Degenerate {
            module,
            reason: reason.into(),
        }
    }

    pub(crate) fn invalid(module: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            module,
            message: message.into(),
        }
    }

    /// True for malformed input text (grid, CSV, JSON), as opposed to a
    /// numerical or domain failure.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Series(_))
    }
}

fn format_coords(coords: &[PixelCoord]) -> String {
    const SHOWN: usize = 10;
    let mut s = coords
        .iter()
        .take(SHOWN)
        .map(|c| format!("({}, {})", c.row, c.col))
        .collect::<Vec<_>>()
        .join(", ");
    if coords.len() > SHOWN {
        s.push_str(&format!(" and {} more", coords.len() - SHOWN));
    }
    s
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
