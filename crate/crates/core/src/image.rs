//! Binary raster images and the shared base coordinate system.
//!
//! Images of different pixel dimensions are compared in a common physical
//! frame: the shared extent is the element-wise minimum of the two pixel
//! dimensions, and each image gets its own cell size so that
//! `cols * cell_x == extent_x`. Alignment never resamples pixels.

use crate::error::{Error, Result};

const ASPECT_TOLERANCE: f64 = 1e-9;

/// A rectangular grid of `{0, 1}` cells stored row-major (1 = foreground).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    rows: usize,
    cols: usize,
    cells: Vec<u8>,
}

impl BinaryImage {
    /// Builds an image from row-major cells. Every cell must be 0 or 1.
    pub fn new(rows: usize, cols: usize, cells: Vec<u8>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidImage(format!(
                "dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if cells.len() != rows * cols {
            return Err(Error::InvalidImage(format!(
                "expected {} cells for {rows}x{cols}, got {}",
                rows * cols,
                cells.len()
            )));
        }
        if let Some(bad) = cells.iter().find(|&&v| v > 1) {
            return Err(Error::InvalidImage(format!("cell value {bad} is not binary")));
        }
        Ok(Self { rows, cols, cells })
    }

    /// All-background image.
    ///
    /// # Panics
    /// If either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "image dimensions must be positive");
        Self {
            rows,
            cols,
            cells: vec![0; rows * cols],
        }
    }

    /// Builds an image by evaluating `f(row, col)` for every cell.
    ///
    /// # Panics
    /// If either dimension is zero.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut img = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                img.cells[r * cols + c] = f(r, c) as u8;
            }
        }
        img
    }

    /// Parses an ASCII picture, one string per row; `#`, `1` and `X` are foreground.
    ///
    /// Handy for tests and small fixtures.
    pub fn from_ascii(rows: &[&str]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.chars().count());
        let mut cells = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.chars().count() != cols {
                return Err(Error::InvalidImage("ragged ascii rows".into()));
            }
            cells.extend(row.chars().map(|ch| matches!(ch, '#' | '1' | 'X') as u8));
        }
        Self::new(rows.len(), cols, cells)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.cells[row * self.cols + col]
    }

    pub fn is_foreground(&self, row: usize, col: usize) -> bool {
        self.get(row, col) == 1
    }

    pub fn set(&mut self, row: usize, col: usize, foreground: bool) {
        self.cells[row * self.cols + col] = foreground as u8;
    }

    pub fn foreground_count(&self) -> usize {
        self.cells.iter().filter(|&&v| v == 1).count()
    }

    pub fn has_background(&self) -> bool {
        self.cells.contains(&0)
    }

    /// Swaps foreground and background.
    pub fn complement(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            cells: self.cells.iter().map(|&v| 1 - v).collect(),
        }
    }

    /// Lossless counterclockwise rotation by `quarter_turns * 90` degrees.
    ///
    /// With rows pointing down and columns to the right, one counterclockwise
    /// turn sends cell `(r, c)` to `(cols - 1 - c, r)`, so the first column of
    /// the input becomes the first row of the output read left to right.
    /// `quarter_turns` is taken modulo 4.
    pub fn rotate90(&self, quarter_turns: u32) -> Self {
        let (rows, cols) = (self.rows, self.cols);
        match quarter_turns % 4 {
            0 => self.clone(),
            1 => {
                let mut out = Self::zeros(cols, rows);
                for r in 0..rows {
                    for c in 0..cols {
                        out.cells[(cols - 1 - c) * rows + r] = self.get(r, c);
                    }
                }
                out
            }
            2 => {
                let mut cells = self.cells.clone();
                cells.reverse();
                Self { rows, cols, cells }
            }
            _ => {
                let mut out = Self::zeros(cols, rows);
                for r in 0..rows {
                    for c in 0..cols {
                        out.cells[c * rows + (rows - 1 - r)] = self.get(r, c);
                    }
                }
                out
            }
        }
    }

    /// Pixel-replication upsampling by an integer factor.
    ///
    /// # Panics
    /// If `factor` is zero.
    pub fn upscale(&self, factor: usize) -> Self {
        assert!(factor > 0, "upscale factor must be positive");
        Self::from_fn(self.rows * factor, self.cols * factor, |r, c| {
            self.is_foreground(r / factor, c / factor)
        })
    }
}

/// Physical extent and cell size mapping a pixel grid into base coordinates.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BaseFrame {
    pub extent_x: f64,
    pub extent_y: f64,
    pub cell_x: f64,
    pub cell_y: f64,
}

impl BaseFrame {
    /// Frame with unit cells, i.e. base units equal pixels.
    pub fn unit(img: &BinaryImage) -> Self {
        Self {
            extent_x: img.cols() as f64,
            extent_y: img.rows() as f64,
            cell_x: 1.0,
            cell_y: 1.0,
        }
    }

    /// Frame of `img` whose horizontal extent is `extent_x` base units.
    /// The vertical extent follows from the square-cell requirement.
    pub fn with_extent(img: &BinaryImage, extent_x: f64) -> Result<Self> {
        if !(extent_x.is_finite() && extent_x > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "frame extent must be positive, got {extent_x}"
            )));
        }
        let cell = extent_x / img.cols() as f64;
        Ok(Self {
            extent_x,
            extent_y: cell * img.rows() as f64,
            cell_x: cell,
            cell_y: cell,
        })
    }

    /// Base-coordinate center of pixel `(row, col)` (0-indexed).
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        ((col as f64 + 0.5) * self.cell_x, (row as f64 + 0.5) * self.cell_y)
    }

    pub fn area(&self) -> f64 {
        self.extent_x * self.extent_y
    }

    /// Whether this frame is a valid frame for `img`.
    pub fn fits(&self, img: &BinaryImage) -> bool {
        let positive = [self.extent_x, self.extent_y, self.cell_x, self.cell_y]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        positive
            && rel_eq(self.extent_x, img.cols() as f64 * self.cell_x)
            && rel_eq(self.extent_y, img.rows() as f64 * self.cell_y)
            && rel_eq(self.cell_x, self.cell_y)
    }
}

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= ASPECT_TOLERANCE * a.abs().max(b.abs())
}

/// Places two images in a shared base coordinate system.
///
/// The shared extent is the element-wise minimum of the pixel dimensions;
/// each image's cell size is that extent divided by its own pixel count.
/// Images whose aspect ratios differ are rejected, since the resulting
/// cells would not be square.
pub fn align_frames(a: &BinaryImage, b: &BinaryImage) -> Result<(BaseFrame, BaseFrame)> {
    // cols1 / rows1 == cols2 / rows2, cross-multiplied.
    let lhs = (a.cols() * b.rows()) as f64;
    let rhs = (b.cols() * a.rows()) as f64;
    if !rel_eq(lhs, rhs) {
        return Err(Error::AspectMismatch {
            rows1: a.rows(),
            cols1: a.cols(),
            rows2: b.rows(),
            cols2: b.cols(),
        });
    }
    let extent_x = a.cols().min(b.cols()) as f64;
    let extent_y = a.rows().min(b.rows()) as f64;
    let frame = |img: &BinaryImage| BaseFrame {
        extent_x,
        extent_y,
        cell_x: extent_x / img.cols() as f64,
        cell_y: extent_y / img.rows() as f64,
    };
    Ok((frame(a), frame(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_non_binary_cells() {
        assert!(BinaryImage::new(1, 2, vec![0, 2]).is_err());
        assert!(BinaryImage::new(2, 2, vec![0, 1, 1]).is_err());
        assert!(BinaryImage::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn align_same_size() {
        let a = BinaryImage::zeros(300, 300);
        let (fa, fb) = align_frames(&a, &a).unwrap();
        for f in [fa, fb] {
            assert_eq!((f.extent_x, f.extent_y, f.cell_x, f.cell_y), (300.0, 300.0, 1.0, 1.0));
        }
    }

    #[test]
    fn align_double_resolution() {
        let (fa, fb) = align_frames(&BinaryImage::zeros(300, 300), &BinaryImage::zeros(600, 600)).unwrap();
        assert_eq!((fa.extent_x, fa.cell_x), (300.0, 1.0));
        assert_eq!(
            (fb.extent_x, fb.extent_y, fb.cell_x, fb.cell_y),
            (300.0, 300.0, 0.5, 0.5)
        );
    }

    #[test]
    fn align_quadruple_resolution() {
        let (fa, fb) = align_frames(&BinaryImage::zeros(256, 256), &BinaryImage::zeros(1024, 1024)).unwrap();
        assert_eq!((fa.extent_x, fa.cell_x), (256.0, 1.0));
        assert_eq!((fb.extent_x, fb.cell_x, fb.cell_y), (256.0, 0.25, 0.25));
    }

    #[test]
    fn align_rejects_aspect_mismatch() {
        let err = align_frames(&BinaryImage::zeros(10, 20), &BinaryImage::zeros(10, 10)).unwrap_err();
        assert_eq!(err.kind(), "AspectMismatch");
        // proportional non-square pair is fine
        let (fa, fb) = align_frames(&BinaryImage::zeros(10, 20), &BinaryImage::zeros(30, 60)).unwrap();
        assert!(fa.fits(&BinaryImage::zeros(10, 20)));
        assert!(fb.fits(&BinaryImage::zeros(30, 60)));
        assert_eq!(fb.cell_x, fb.cell_y);
    }

    #[test]
    fn rotate_column_counterclockwise() {
        let img = BinaryImage::new(2, 1, vec![1, 0]).unwrap();
        let rot = img.rotate90(1);
        assert_eq!((rot.rows(), rot.cols()), (1, 2));
        assert_eq!(rot.cells(), &[1, 0]);
        assert_eq!(img.rotate90(0), img);
    }

    #[test]
    fn rotate_corner_marker() {
        // top-right corner goes to top-left under a counterclockwise turn
        let img = BinaryImage::from_ascii(&["..#", "..."]).unwrap();
        let rot = img.rotate90(1);
        assert_eq!(rot, BinaryImage::from_ascii(&["#.", "..", ".."]).unwrap());
    }

    #[test]
    fn upscale_replicates() {
        let img = BinaryImage::from_ascii(&["#.", ".#"]).unwrap();
        let up = img.upscale(2);
        assert_eq!(up, BinaryImage::from_ascii(&["##..", "##..", "..##", "..##"]).unwrap());
    }

    fn arb_image() -> impl Strategy<Value = BinaryImage> {
        (1usize..12, 1usize..12).prop_flat_map(|(r, c)| {
            proptest::collection::vec(0u8..2, r * c).prop_map(move |cells| BinaryImage::new(r, c, cells).unwrap())
        })
    }

    proptest! {
        #[test]
        fn rotation_group_identities(img in arb_image(), k in 0u32..4) {
            prop_assert_eq!(img.rotate90(1).rotate90(3), img.clone());
            let four = img.rotate90(1).rotate90(1).rotate90(1).rotate90(1);
            prop_assert_eq!(&four, &img);
            let rot = img.rotate90(k);
            prop_assert_eq!(rot.foreground_count(), img.foreground_count());
            prop_assert_eq!(rot.len(), img.len());
            prop_assert_eq!(img.rotate90(2), img.rotate90(1).rotate90(1));
            prop_assert_eq!(img.rotate90(3), img.rotate90(2).rotate90(1));
        }

        #[test]
        fn aligned_frames_share_extent(r in 1usize..50, c in 1usize..50, s in 1usize..5) {
            let a = BinaryImage::zeros(r, c);
            let b = BinaryImage::zeros(r * s, c * s);
            let (fa, fb) = align_frames(&a, &b).unwrap();
            prop_assert_eq!(fa.extent_x, fb.extent_x);
            prop_assert_eq!(fa.extent_y, fb.extent_y);
            prop_assert!(fa.fits(&a) && fb.fits(&b));
        }
    }
}
