//! Binary PGM (P5) reading and writing.
//!
//! Estimates are written as 16-bit big-endian PGM, linearly mapped from the
//! image's value range to 0..=65535, with the original `min` and `max`
//! recorded one per line in a plain-text sidecar at `<path>.meta` so the
//! mapping is invertible.

use crate::error::{Error, Result};
use crate::image::Image;
use std::fs;
use std::io::Write;
use std::path::Path;

/// Reads an 8- or 16-bit binary PGM. Sample values are returned as raw
/// `f64` levels (no rescaling).
pub fn read_pgm(path: &Path) -> Result<Image> {
    let bytes = fs::read(path)?;
    let mut cursor = 0usize;

    let magic = next_token(&bytes, &mut cursor)
        .ok_or_else(|| Error::Format("missing PGM magic".into()))?;
    if magic != b"P5" {
        return Err(Error::Format(format!(
            "unsupported PGM magic {:?} (only binary P5 is handled)",
            String::from_utf8_lossy(&magic)
        )));
    }
    let width = next_usize(&bytes, &mut cursor, "width")?;
    let height = next_usize(&bytes, &mut cursor, "height")?;
    let maxval = next_usize(&bytes, &mut cursor, "maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Format("empty PGM".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Format(format!("bad PGM maxval {maxval}")));
    }
    // exactly one whitespace byte separates the header from the samples
    if cursor >= bytes.len() || !bytes[cursor].is_ascii_whitespace() {
        return Err(Error::Format("missing PGM header terminator".into()));
    }
    cursor += 1;

    let n = width * height;
    let wide = maxval > 255;
    let need = n * if wide { 2 } else { 1 };
    let data = &bytes[cursor..];
    if data.len() < need {
        return Err(Error::Format(format!(
            "PGM data truncated: need {need} bytes, have {}",
            data.len()
        )));
    }
    let values: Vec<f64> = if wide {
        data[..need]
            .chunks_exact(2)
            .map(|p| u16::from_be_bytes([p[0], p[1]]) as f64)
            .collect()
    } else {
        data[..need].iter().map(|&b| b as f64).collect()
    };
    Image::from_vec(height, width, values)
}

/// Writes `image` as 16-bit big-endian PGM plus a `<path>.meta` sidecar
/// holding the pre-quantization minimum and maximum, one per line.
pub fn write_pgm16(path: &Path, image: &Image) -> Result<()> {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in image.data() {
        if !v.is_finite() {
            return Err(Error::InvalidParameter(
                "cannot write non-finite sample to PGM".into(),
            ));
        }
        min = min.min(v);
        max = max.max(v);
    }
    let span = max - min;
    let mut out = Vec::with_capacity(32 + 2 * image.len());
    write!(out, "P5\n{} {}\n65535\n", image.width(), image.height())?;
    for &v in image.data() {
        let level = if span > 0.0 {
            ((v - min) / span * 65535.0).round() as u16
        } else {
            0
        };
        out.extend_from_slice(&level.to_be_bytes());
    }
    fs::write(path, out)?;
    let meta = format!("{min}\n{max}\n");
    fs::write(sidecar_path(path), meta)?;
    Ok(())
}

/// The sidecar file that accompanies [`write_pgm16`] output.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".meta");
    os.into()
}

fn next_token(bytes: &[u8], cursor: &mut usize) -> Option<Vec<u8>> {
    loop {
        while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        if *cursor < bytes.len() && bytes[*cursor] == b'#' {
            while *cursor < bytes.len() && bytes[*cursor] != b'\n' {
                *cursor += 1;
            }
            continue;
        }
        break;
    }
    if *cursor >= bytes.len() {
        return None;
    }
    let start = *cursor;
    while *cursor < bytes.len() && !bytes[*cursor].is_ascii_whitespace() {
        *cursor += 1;
    }
    Some(bytes[start..*cursor].to_vec())
}

fn next_usize(bytes: &[u8], cursor: &mut usize, what: &str) -> Result<usize> {
    let tok = next_token(bytes, cursor)
        .ok_or_else(|| Error::Format(format!("missing PGM {what}")))?;
    std::str::from_utf8(&tok)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Format(format!("bad PGM {what}")))
}
