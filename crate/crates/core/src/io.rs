//! Reading and writing binary masks as portable graymaps (P2/P5) and
//! grayscale PNG. Any nonzero pixel loads as foreground.

use std::fs;
use std::path::Path;

use image::DynamicImage;

use crate::error::{Error, Result};
use crate::image::BinaryImage;

const PNG_MAGIC: &[u8] = b"\x89PNG\r\n\x1a\n";

/// Loads a mask, detecting the format from the file contents.
pub fn load_image(path: impl AsRef<Path>) -> Result<BinaryImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|source| Error::UnreadableFile {
        path: path.to_owned(),
        source,
    })?;
    let img = if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        decode_pgm(&bytes)?
    } else if bytes.starts_with(PNG_MAGIC) {
        decode_png(&bytes)?
    } else {
        return Err(Error::UnsupportedFormat(format!(
            "{} is neither a PGM nor a PNG file",
            path.display()
        )));
    };
    img.ok_or_else(|| Error::EmptyImage(path.to_owned()))
}

/// Saves a mask; the format follows the extension (`.pgm` or `.png`).
///
/// Graymaps are written as binary P5 with maxval 1, PNGs as 8-bit gray with
/// foreground at 255.
pub fn save_image(img: &BinaryImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    let bytes = match ext.as_deref() {
        Some("pgm") => encode_pgm(img),
        Some("png") => encode_png(img).map_err(|reason| Error::WriteFailure {
            path: path.to_owned(),
            reason,
        })?,
        _ => {
            return Err(Error::UnsupportedFormat(format!(
                "cannot infer output format from {}",
                path.display()
            )))
        }
    };
    fs::write(path, bytes).map_err(|e| Error::WriteFailure {
        path: path.to_owned(),
        reason: e.to_string(),
    })
}

fn encode_pgm(img: &BinaryImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n1\n", img.cols(), img.rows()).into_bytes();
    out.extend_from_slice(img.cells());
    out
}

fn encode_png(img: &BinaryImage) -> std::result::Result<Vec<u8>, String> {
    let pixels: Vec<u8> = img.cells().iter().map(|&v| v * 255).collect();
    let gray =
        image::GrayImage::from_raw(img.cols() as u32, img.rows() as u32, pixels).ok_or("pixel buffer size mismatch")?;
    let mut buf = std::io::Cursor::new(Vec::new());
    gray.write_to(&mut buf, image::ImageFormat::Png)
        .map_err(|e| e.to_string())?;
    Ok(buf.into_inner())
}

fn decode_png(bytes: &[u8]) -> Result<Option<BinaryImage>> {
    let dynamic = image::load_from_memory_with_format(bytes, image::ImageFormat::Png)
        .map_err(|e| Error::UnsupportedFormat(format!("png decode failed: {e}")))?;
    let (cols, rows) = (dynamic.width() as usize, dynamic.height() as usize);
    let cells: Vec<u8> = match dynamic {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(|v| (v != 0) as u8).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(|v| (v != 0) as u8).collect(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| (p.0[0] != 0) as u8).collect(),
        DynamicImage::ImageLumaA16(buf) => buf.pixels().map(|p| (p.0[0] != 0) as u8).collect(),
        other => {
            return Err(Error::UnsupportedFormat(format!(
                "png color type {:?} is not grayscale",
                other.color()
            )))
        }
    };
    if rows == 0 || cols == 0 {
        return Ok(None);
    }
    BinaryImage::new(rows, cols, cells).map(Some)
}

/// Splits a PGM header into tokens, honouring `#` comments. Returns the
/// tokens and the offset just past the single whitespace byte that ends the
/// header (the start of the raster for P5).
fn pgm_header(bytes: &[u8], wanted: usize) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::with_capacity(wanted);
    let mut i = 0;
    while tokens.len() < wanted {
        while i < bytes.len() && (bytes[i].is_ascii_whitespace() || bytes[i] == b'#') {
            if bytes[i] == b'#' {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            } else {
                i += 1;
            }
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'#' {
            i += 1;
        }
        if start == i {
            return Err(Error::UnsupportedFormat("truncated PGM header".into()));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    Ok((tokens, i + 1))
}

fn parse_usize(tok: &str, what: &str) -> Result<usize> {
    tok.parse()
        .map_err(|_| Error::UnsupportedFormat(format!("bad PGM {what}: {tok:?}")))
}

fn decode_pgm(bytes: &[u8]) -> Result<Option<BinaryImage>> {
    let (header, raster_start) = pgm_header(bytes, 4)?;
    let cols = parse_usize(&header[1], "width")?;
    let rows = parse_usize(&header[2], "height")?;
    let maxval = parse_usize(&header[3], "maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::UnsupportedFormat(format!("PGM maxval {maxval} out of range")));
    }
    if rows == 0 || cols == 0 {
        return Ok(None);
    }
    let n = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::UnsupportedFormat("PGM dimensions overflow".into()))?;
    let cells = if header[0] == "P5" {
        let width = if maxval < 256 { 1 } else { 2 };
        let raster = bytes
            .get(raster_start..)
            .filter(|r| r.len() >= n * width)
            .ok_or_else(|| Error::UnsupportedFormat("truncated PGM raster".into()))?;
        raster[..n * width]
            .chunks_exact(width)
            .map(|px| px.iter().any(|&b| b != 0) as u8)
            .collect()
    } else {
        let text = std::str::from_utf8(&bytes[raster_start.min(bytes.len())..])
            .map_err(|_| Error::UnsupportedFormat("P2 raster is not ASCII".into()))?;
        let mut cells = Vec::with_capacity(n);
        for line in text.lines() {
            let data = line.split('#').next().unwrap_or("");
            for tok in data.split_ascii_whitespace() {
                let v: usize = parse_usize(tok, "pixel")?;
                cells.push((v != 0) as u8);
            }
        }
        if cells.len() < n {
            return Err(Error::UnsupportedFormat("truncated PGM raster".into()));
        }
        cells.truncate(n);
        cells
    };
    BinaryImage::new(rows, cols, cells).map(Some)
}
