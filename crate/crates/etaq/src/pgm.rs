//! Binary 16-bit PGM heatmap output: magic "P5", 65535 maxval, big-endian
//! samples, linear min-max scaling. The scaling actually used is returned so
//! reports can record it.

use crate::error::{Error, Result};
use std::io::Write;
use std::path::Path;

/// Writes `data` (row-major, `width * height` values, top row first) and
/// returns the (min, max) used for scaling. A constant image maps to 0.
pub fn write_pgm16(path: &Path, width: usize, height: usize, data: &[f64]) -> Result<(f64, f64)> {
    if data.len() != width * height || width == 0 || height == 0 {
        return Err(Error::Argument("pgm dimensions do not match data".into()));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument("pgm data must be finite".into()));
    }
    let min = data.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = max - min;
    let mut bytes = Vec::with_capacity(32 + 2 * data.len());
    bytes.extend_from_slice(format!("P5\n{width} {height}\n65535\n").as_bytes());
    for v in data {
        let scaled = if span > 0.0 {
            (((v - min) / span) * 65535.0).round() as u16
        } else {
            0
        };
        bytes.extend_from_slice(&scaled.to_be_bytes());
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok((min, max))
}
