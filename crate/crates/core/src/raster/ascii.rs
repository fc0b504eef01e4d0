//! Plain-text (ESRI ASCII) grid codec.
//!
//! ```text
//! ncols 2
//! nrows 2
//! xllcorner 0
//! yllcorner 0
//! cellsize 1
//! NODATA_value -9999
//! 1.000000 2.000000
//! 3.000000 4.000000
//! ```
//!
//! Keywords are matched case-insensitively and may appear in any order. The
//! writer always emits the order above, single spaces and six decimals per
//! cell; nodata cells are written as the header's `NODATA_value` literal.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::raster::{GeoRef, Grid, PixelMask, DEFAULT_NODATA};
use crate::scalar::Scalar;

const KEYWORDS: [&str; 6] = [
    "ncols",
    "nrows",
    "xllcorner",
    "yllcorner",
    "cellsize",
    "NODATA_value",
];

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn header_int(slot: usize, lineno: usize, raw: &str) -> Result<usize> {
    match raw.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(parse_err(
            lineno,
            format!("{} must be a positive integer, got '{raw}'", KEYWORDS[slot]),
        )),
    }
}

fn header_real(slot: usize, lineno: usize, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(lineno, format!("{} is not a real number: '{raw}'", KEYWORDS[slot])))
}

fn header_nodata<T: Scalar>(lineno: usize, raw: &str) -> Result<T> {
    raw.parse::<T>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(lineno, format!("NODATA_value is not a real number: '{raw}'")))
}

pub fn read_grid<T: Scalar>(text: &str) -> Result<Grid<T>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut header: [Option<(usize, &str)>; 6] = [None; 6];

    for _ in 0..KEYWORDS.len() {
        let (lineno, line) = lines
            .next()
            .ok_or_else(|| parse_err(text.lines().count() + 1, "truncated header"))?;
        let mut tokens = line.split_whitespace();
        let key = tokens
            .next()
            .ok_or_else(|| parse_err(lineno, "empty header line"))?;
        let slot = KEYWORDS
            .iter()
            .position(|k| k.eq_ignore_ascii_case(key))
            .ok_or_else(|| parse_err(lineno, format!("unknown header keyword '{key}'")))?;
        if header[slot].is_some() {
            return Err(parse_err(lineno, format!("duplicate header keyword '{key}'")));
        }
        let value = tokens
            .next()
            .ok_or_else(|| parse_err(lineno, format!("missing value for '{key}'")))?;
        if tokens.next().is_some() {
            return Err(parse_err(lineno, format!("trailing tokens after '{key}'")));
        }
        match slot {
            0 | 1 => {
                header_int(slot, lineno, value)?;
            }
            5 => {
                header_nodata::<T>(lineno, value)?;
            }
            _ => {
                header_real(slot, lineno, value)?;
            }
        }
        header[slot] = Some((lineno, value));
    }

    let field = |i: usize| header[i].expect("all keywords present");
    let ncols = header_int(0, field(0).0, field(0).1)?;
    let nrows = header_int(1, field(1).0, field(1).1)?;
    let georef = GeoRef {
        xllcorner: header_real(2, field(2).0, field(2).1)?,
        yllcorner: header_real(3, field(3).0, field(3).1)?,
        cellsize: header_real(4, field(4).0, field(4).1)?,
    };
    let nodata = header_nodata::<T>(field(5).0, field(5).1)?;

    let mut cells = Vec::with_capacity(ncols * nrows);
    let mut rows_read = 0;
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        if rows_read == nrows {
            return Err(parse_err(lineno, format!("more than {nrows} data rows")));
        }
        let before = cells.len();
        for token in line.split_whitespace() {
            let v = token
                .parse::<T>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(lineno, format!("non-numeric cell '{token}'")))?;
            cells.push(v);
        }
        let got = cells.len() - before;
        if got != ncols {
            return Err(parse_err(
                lineno,
                format!("expected {ncols} cells, found {got}"),
            ));
        }
        rows_read += 1;
    }
    if rows_read != nrows {
        return Err(parse_err(
            text.lines().count(),
            format!("expected {nrows} data rows, found {rows_read}"),
        ));
    }

    Ok(Grid::new(ncols, nrows, cells, nodata)?.with_georef(georef))
}

fn write_header<T: Scalar>(out: &mut String, ncols: usize, nrows: usize, georef: GeoRef, nodata: T) {
    let _ = writeln!(out, "ncols {ncols}");
    let _ = writeln!(out, "nrows {nrows}");
    let _ = writeln!(out, "xllcorner {}", georef.xllcorner);
    let _ = writeln!(out, "yllcorner {}", georef.yllcorner);
    let _ = writeln!(out, "cellsize {}", georef.cellsize);
    let _ = writeln!(out, "NODATA_value {nodata}");
}

pub fn write_grid<T: Scalar>(grid: &Grid<T>) -> String {
    let mut out = String::with_capacity(64 + grid.len() * 10);
    write_header(&mut out, grid.ncols(), grid.nrows(), grid.georef(), grid.nodata());
    let nodata = grid.nodata().to_string();
    for row in grid.cells().chunks(grid.ncols()) {
        for (i, &v) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            if grid.is_nodata(v) {
                out.push_str(&nodata);
            } else {
                let _ = write!(out, "{v:.6}");
            }
        }
        out.push('\n');
    }
    out
}

/// Reads a 0/1 grid as a mask. Nodata cells read as false.
pub fn read_mask(text: &str) -> Result<PixelMask> {
    let grid = read_grid::<f64>(text)?;
    PixelMask::from_grid(&grid)
}

/// Writes a mask as a 0/1 grid.
pub fn write_mask(mask: &PixelMask) -> String {
    let mut out = String::with_capacity(64 + mask.bits().len() * 2);
    write_header(
        &mut out,
        mask.ncols(),
        mask.nrows(),
        GeoRef::default(),
        DEFAULT_NODATA,
    );
    for row in mask.bits().chunks(mask.ncols()) {
        let line: Vec<&str> = row.iter().map(|&b| if b { "1" } else { "0" }).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
