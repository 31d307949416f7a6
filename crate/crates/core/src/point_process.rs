//! Marked point-process representation of a binary image: one point per
//! anchor, marked with its radius (distance to the object boundary) and the
//! label of the object it belongs to.

use serde::Serialize;

use crate::error::Result;
use crate::image::{BaseFrame, BinaryImage};
use crate::morphology::{adaptive_thin, connected_components, distance_transform, local_maxima};

/// One anchor point in base coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Anchor {
    pub x: f64,
    pub y: f64,
    /// Distance to the nearest background cell, in base units.
    pub radius: f64,
    /// 8-connected object label, `1..=K`.
    pub label: u32,
    /// Source pixel, kept for exact integer checks.
    #[serde(skip)]
    pub row: usize,
    #[serde(skip)]
    pub col: usize,
    /// Squared radius in pixel units.
    #[serde(skip)]
    pub squared_radius_px: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkedPointProcess {
    anchors: Vec<Anchor>,
    frame: BaseFrame,
    object_count: u32,
}

impl MarkedPointProcess {
    /// Assembles a process from explicit anchors. Used for synthetic point
    /// patterns; image-derived processes come from [`extract`].
    pub fn from_anchors(anchors: Vec<Anchor>, frame: BaseFrame) -> Self {
        let object_count = anchors.iter().map(|a| a.label).max().unwrap_or(0);
        Self {
            anchors,
            frame,
            object_count,
        }
    }

    pub fn anchors(&self) -> &[Anchor] {
        &self.anchors
    }

    pub fn frame(&self) -> &BaseFrame {
        &self.frame
    }

    /// `n_p`.
    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.anchors.iter().map(|a| (a.x, a.y)).collect()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.anchors.iter().map(|a| a.radius).collect()
    }

    pub fn labels(&self) -> Vec<u32> {
        self.anchors.iter().map(|a| a.label).collect()
    }

    /// Largest anchor label, i.e. the object count.
    pub fn max_label(&self) -> u32 {
        self.anchors.iter().map(|a| a.label).max().unwrap_or(0)
    }

    /// Number of 8-connected objects in the source image (0 for synthetic
    /// processes built without one).
    pub fn object_count(&self) -> u32 {
        self.object_count
    }
}

/// Quarter turns that bring `img` to the smallest of its four rotations,
/// ordered by dimensions and then cells.
fn canonical_turns(img: &BinaryImage) -> u32 {
    (1..4)
        .fold((0, img.clone()), |(best, best_img), k| {
            let rotated = img.rotate90(k);
            let key = |x: &BinaryImage| (x.rows(), x.cols());
            if (key(&rotated), rotated.cells()) < (key(&best_img), best_img.cells()) {
                (k, rotated)
            } else {
                (best, best_img)
            }
        })
        .0
}

/// Runs distance transform, local maxima, adaptive thinning and component
/// labelling, and expresses the anchors in `frame`'s base coordinates.
///
/// Thinning breaks ties in scan order, so it runs on the canonical rotation
/// of the image and the result is rotated back. All rotations of an image
/// share one canonical rotation, so their anchor sets are rotations of one
/// another.
///
/// Anchors are listed in row-major pixel order.
pub fn extract(img: &BinaryImage, frame: &BaseFrame) -> Result<MarkedPointProcess> {
    debug_assert!(frame.fits(img), "frame does not match image dimensions");
    let turns = canonical_turns(img);
    let back = (4 - turns) % 4;
    let canonical_field = distance_transform(&img.rotate90(turns))?;
    let anchors_mask = adaptive_thin(&canonical_field, &local_maxima(&canonical_field)).rotate90(back);
    let field = canonical_field.rotate90(back);
    let labels = connected_components(img);
    let anchors = anchors_mask
        .cells()
        .into_iter()
        .map(|(row, col)| {
            let (x, y) = frame.cell_center(row, col);
            Anchor {
                x,
                y,
                radius: field.value(row, col) * frame.cell_x,
                label: labels.get(row, col),
                row,
                col,
                squared_radius_px: field.squared(row, col),
            }
        })
        .collect();
    Ok(MarkedPointProcess {
        anchors,
        frame: *frame,
        object_count: labels.count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphology::connected_components;

    #[test]
    fn empty_image_gives_empty_process() {
        let img = BinaryImage::zeros(8, 8);
        let mpp = extract(&img, &BaseFrame::unit(&img)).unwrap();
        assert!(mpp.is_empty());
        assert_eq!(mpp.max_label(), 0);
    }

    #[test]
    fn single_pixel() {
        let mut img = BinaryImage::zeros(10, 10);
        img.set(3, 6, true);
        let mpp = extract(&img, &BaseFrame::unit(&img)).unwrap();
        assert_eq!(mpp.len(), 1);
        let a = mpp.anchors()[0];
        // column 6 / row 3 zero-indexed is (7, 4) one-indexed
        assert_eq!((a.x, a.y), (6.5, 3.5));
        assert_eq!(a.radius, 1.0);
        assert_eq!(a.label, 1);
    }

    #[test]
    fn all_foreground_propagates() {
        let img = BinaryImage::from_fn(4, 4, |_, _| true);
        assert_eq!(
            extract(&img, &BaseFrame::unit(&img)).unwrap_err().kind(),
            "AllForeground"
        );
    }

    #[test]
    fn rotated_images_get_rotated_anchors() {
        // a ridge of tied maxima; the stray pixel breaks the symmetry so the
        // anchor cells themselves, not just their count, must follow
        let img =
            BinaryImage::from_ascii(&["........", ".######.", ".######.", ".######.", "........", "#......."]).unwrap();
        let base = extract(&img, &BaseFrame::unit(&img)).unwrap();
        for k in 1..4 {
            let rotated = img.rotate90(k);
            let mpp = extract(&rotated, &BaseFrame::unit(&rotated)).unwrap();
            let mut expected: Vec<(usize, usize)> = base
                .anchors()
                .iter()
                .map(|a| {
                    let mut m = BinaryImage::zeros(img.rows(), img.cols());
                    m.set(a.row, a.col, true);
                    let m = m.rotate90(k);
                    let i = m.cells().iter().position(|&v| v == 1).unwrap();
                    (i / m.cols(), i % m.cols())
                })
                .collect();
            expected.sort();
            let got: Vec<_> = mpp.anchors().iter().map(|a| (a.row, a.col)).collect();
            assert_eq!(got, expected, "k={k}");
        }
    }

    #[test]
    fn doubled_resolution_radii_agree() {
        let img = BinaryImage::from_fn(40, 40, |r, c| {
            let (dy, dx) = (r as f64 - 19.5, c as f64 - 19.5);
            dx * dx / 144.0 + dy * dy / 64.0 <= 1.0
        });
        let up = img.upscale(2);
        let (f_lo, f_hi) = crate::image::align_frames(&img, &up).unwrap();
        let lo = extract(&img, &f_lo).unwrap();
        let hi = extract(&up, &f_hi).unwrap();
        let max_lo = lo.radii().into_iter().fold(0.0, f64::max);
        let max_hi = hi.radii().into_iter().fold(0.0, f64::max);
        assert!((max_lo - max_hi).abs() <= f_lo.cell_x, "{max_lo} vs {max_hi}");
    }

    #[test]
    fn labels_partition_by_component() {
        let img =
            BinaryImage::from_ascii(&["..........", ".###...##.", ".###...##.", ".###......", "......#..."]).unwrap();
        let mpp = extract(&img, &BaseFrame::unit(&img)).unwrap();
        let cc = connected_components(&img);
        assert_eq!(mpp.max_label(), 3);
        assert_eq!(mpp.object_count(), 3);
        for a in mpp.anchors() {
            assert_eq!(a.label, cc.get(a.row, a.col));
            assert!(a.x >= 0.0 && a.x <= 10.0 && a.y >= 0.0 && a.y <= 5.0);
            assert!(a.radius > 0.0);
        }
        assert!(mpp.len() >= 3 && mpp.len() <= img.foreground_count());
    }
}
