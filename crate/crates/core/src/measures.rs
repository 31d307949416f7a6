//! The four summary measures of a marked point process.
//!
//! * `v1` anchor count
//! * `v2` area coverage: sum of squared radii over the frame area
//! * `v3` anchors per object
//! * `v4` spatial variance irregularity: quadrat-count variance against the
//!   Poisson expectation, mapped into `[0, 1]` (0 regular, about 0.5 random,
//!   towards 1 clustered)

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::image::{BaseFrame, BinaryImage};
use crate::point_process::{extract, MarkedPointProcess};

/// Quadrats per axis used by default for `v4`.
pub const DEFAULT_DIVISIONS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryVector {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub v4: f64,
}

impl SummaryVector {
    pub const ZERO: Self = Self {
        v1: 0.0,
        v2: 0.0,
        v3: 0.0,
        v4: 0.0,
    };

    pub fn new(v1: f64, v2: f64, v3: f64, v4: f64) -> Self {
        Self { v1, v2, v3, v4 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.v1, self.v2, self.v3, self.v4]
    }

    pub fn from_array([v1, v2, v3, v4]: [f64; 4]) -> Self {
        Self { v1, v2, v3, v4 }
    }
}

/// Anchor counts over a `divisions x divisions` partition of the frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadratGrid {
    pub divisions: usize,
    /// Row-major counts, `divisions^2` entries.
    pub counts: Vec<u64>,
}

impl QuadratGrid {
    /// Bins every anchor into the quadrat containing it. Quadrats are
    /// half-open except along the far edges, which are closed.
    ///
    /// # Panics
    /// If `divisions` is zero.
    pub fn from_process(mpp: &MarkedPointProcess, divisions: usize) -> Self {
        assert!(divisions > 0, "quadrat divisions must be positive");
        let frame = mpp.frame();
        let bin = |v: f64, extent: f64| -> usize {
            let idx = (v / extent * divisions as f64).floor();
            (idx.max(0.0) as usize).min(divisions - 1)
        };
        let mut counts = vec![0; divisions * divisions];
        for a in mpp.anchors() {
            counts[bin(a.y, frame.extent_y) * divisions + bin(a.x, frame.extent_x)] += 1;
        }
        Self { divisions, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Population variance of the counts.
    pub fn variance(&self) -> f64 {
        let q = self.counts.len() as f64;
        let mean = self.total() as f64 / q;
        self.counts.iter().map(|&n| (n as f64 - mean).powi(2)).sum::<f64>() / q
    }

    /// `1 / (1 + lambda|B| / s^2)` with `lambda|B| = n / Q` and `s^2` the
    /// population variance of the `Q` counts.
    ///
    /// Evaluated as the ratio `(Q S - n^2) / (Q S - n^2 + Q n)`, where
    /// `S = sum n_i^2`, which is the same quantity multiplied through by
    /// `Q^2`; both parts are exact integers, so the result does not depend
    /// on the order of the quadrats. Returns 0 when `n = 0` or `s^2 = 0`.
    pub fn irregularity(&self) -> f64 {
        let q = self.counts.len() as u128;
        let n = self.total() as u128;
        let sum_sq: u128 = self.counts.iter().map(|&c| (c as u128) * (c as u128)).sum();
        let spread = q * sum_sq - n * n;
        if n == 0 || spread == 0 {
            return 0.0;
        }
        spread as f64 / (spread + q * n) as f64
    }
}

/// `v1`: number of anchors.
pub fn anchor_count(mpp: &MarkedPointProcess) -> f64 {
    mpp.len() as f64
}

/// `v2`: sum of squared radii divided by the frame area (no factor of pi).
pub fn area_coverage(mpp: &MarkedPointProcess) -> f64 {
    let mut sq: Vec<f64> = mpp.anchors().iter().map(|a| a.radius * a.radius).collect();
    // summation order fixed by value, independent of anchor order
    sq.sort_by(f64::total_cmp);
    // fold from +0.0: an empty f64 sum is -0.0
    sq.iter().fold(0.0, |acc, v| acc + v) / mpp.frame().area()
}

/// `v3`: anchors per object, 0 for an empty process.
pub fn anchors_per_object(mpp: &MarkedPointProcess) -> f64 {
    match mpp.max_label() {
        0 => 0.0,
        k => mpp.len() as f64 / k as f64,
    }
}

/// `v4` with the default 10x10 quadrat grid.
pub fn spatial_variance_irregularity(mpp: &MarkedPointProcess) -> f64 {
    QuadratGrid::from_process(mpp, DEFAULT_DIVISIONS).irregularity()
}

pub fn summarize_process(mpp: &MarkedPointProcess, divisions: usize) -> SummaryVector {
    SummaryVector {
        v1: anchor_count(mpp),
        v2: area_coverage(mpp),
        v3: anchors_per_object(mpp),
        v4: QuadratGrid::from_process(mpp, divisions).irregularity(),
    }
}

/// Extracts the point process of `img` in `frame` and reduces it to its
/// summary vector.
pub fn summarize(img: &BinaryImage, frame: &BaseFrame) -> Result<SummaryVector> {
    summarize_with(img, frame, DEFAULT_DIVISIONS)
}

pub fn summarize_with(img: &BinaryImage, frame: &BaseFrame, divisions: usize) -> Result<SummaryVector> {
    Ok(summarize_process(&extract(img, frame)?, divisions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point_process::Anchor;

    fn frame(side: f64) -> BaseFrame {
        BaseFrame {
            extent_x: side,
            extent_y: side,
            cell_x: 1.0,
            cell_y: 1.0,
        }
    }

    fn process(points: &[(f64, f64, f64, u32)], side: f64) -> MarkedPointProcess {
        let anchors = points
            .iter()
            .map(|&(x, y, radius, label)| Anchor {
                x,
                y,
                radius,
                label,
                row: 0,
                col: 0,
                squared_radius_px: 0,
            })
            .collect();
        MarkedPointProcess::from_anchors(anchors, frame(side))
    }

    /// Direct transcription of the quadrat statistic, for cross-checking.
    fn v4_oracle(counts: &[u64]) -> f64 {
        let q = counts.len() as f64;
        let n: f64 = counts.iter().map(|&c| c as f64).sum();
        let mean = n / q;
        let s2 = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / q;
        if n == 0.0 || s2 == 0.0 {
            0.0
        } else {
            1.0 / (1.0 + (n / q) / s2)
        }
    }

    #[test]
    fn empty_process_measures() {
        let mpp = process(&[], 300.0);
        assert_eq!(anchor_count(&mpp), 0.0);
        assert_eq!(area_coverage(&mpp).to_bits(), 0.0f64.to_bits());
        assert_eq!(anchors_per_object(&mpp), 0.0);
        assert_eq!(spatial_variance_irregularity(&mpp), 0.0);
    }

    #[test]
    fn coverage_values() {
        let one = process(&[(10.0, 10.0, 1.0, 1)], 300.0);
        assert_eq!(anchor_count(&one), 1.0);
        assert!((area_coverage(&one) - 1.0 / 90000.0).abs() < 1e-18);
        let two = process(&[(1.0, 1.0, 2.0, 1), (5.0, 5.0, 3.0, 1)], 10.0);
        assert!((area_coverage(&two) - 0.13).abs() < 1e-15);
    }

    #[test]
    fn anchors_per_object_values() {
        let pts: Vec<_> = (0..6).map(|i| (i as f64, 1.0, 1.0, (i % 3 + 1) as u32)).collect();
        assert_eq!(anchors_per_object(&process(&pts, 10.0)), 2.0);
    }

    #[test]
    fn one_point_per_quadrat_is_regular() {
        let pts: Vec<_> = (0..100)
            .map(|i| ((i % 10) as f64 * 10.0 + 5.0, (i / 10) as f64 * 10.0 + 5.0, 1.0, 1))
            .collect();
        let grid = QuadratGrid::from_process(&process(&pts, 100.0), 10);
        assert!(grid.counts.iter().all(|&c| c == 1));
        assert_eq!(grid.irregularity(), 0.0);
    }

    #[test]
    fn all_in_one_quadrat_is_clustered() {
        let pts: Vec<_> = (0..500).map(|i| (1.0 + (i % 7) as f64, 2.0, 1.0, 1)).collect();
        let grid = QuadratGrid::from_process(&process(&pts, 100.0), 10);
        assert_eq!(grid.counts[0], 500);
        // s^2 = 500^2 * 99 / 100^2 = 2475, lambda|B| = 5
        assert!((grid.variance() - 2475.0).abs() < 1e-9);
        let v4 = grid.irregularity();
        assert!((v4 - 2475.0 / 2480.0).abs() < 1e-15);
        assert!(v4 > 0.95);
    }

    #[test]
    fn single_point_v4() {
        let grid = QuadratGrid::from_process(&process(&[(0.5, 0.5, 1.0, 1)], 10.0), 10);
        // s^2 = (99 * 0.01^2 + 0.99^2) / 100 = 0.0099, lambda|B| = 0.01
        assert!((grid.variance() - 0.0099).abs() < 1e-15);
        assert!((grid.irregularity() - 99.0 / 199.0).abs() < 1e-15);
        assert!((grid.irregularity() - v4_oracle(&grid.counts)).abs() < 1e-12);
    }

    #[test]
    fn far_edges_go_to_last_quadrat() {
        let grid = QuadratGrid::from_process(&process(&[(10.0, 10.0, 1.0, 1), (0.0, 0.0, 1.0, 1)], 10.0), 10);
        assert_eq!(grid.counts[99], 1);
        assert_eq!(grid.counts[0], 1);
        assert_eq!(grid.total(), 2);
    }

    #[test]
    fn summarize_empty_and_single_pixel() {
        let img = BinaryImage::zeros(10, 10);
        assert_eq!(summarize(&img, &BaseFrame::unit(&img)).unwrap(), SummaryVector::ZERO);

        let mut img = BinaryImage::zeros(10, 10);
        img.set(4, 4, true);
        let v = summarize(&img, &BaseFrame::unit(&img)).unwrap();
        assert_eq!(v.v1, 1.0);
        assert!((v.v2 - 0.01).abs() < 1e-15);
        assert_eq!(v.v3, 1.0);
        assert!((v.v4 - 0.4975).abs() < 1e-4);
    }

    #[test]
    fn block_anchor_count_matches_hand_composition() {
        let img = BinaryImage::from_ascii(&[".....", ".###.", ".###.", ".###.", "....."]).unwrap();
        // distance 2 at the center is the only local maximum
        let v = summarize(&img, &BaseFrame::unit(&img)).unwrap();
        assert_eq!(v.v1, 1.0);
        assert!((v.v2 - 4.0 / 25.0).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn v4_matches_direct_formula(counts in proptest::collection::vec(0u64..50, 100)) {
            let grid = QuadratGrid { divisions: 10, counts };
            let v4 = grid.irregularity();
            proptest::prop_assert!((0.0..=1.0).contains(&v4));
            proptest::prop_assert!((v4 - v4_oracle(&grid.counts)).abs() < 1e-12);
        }
    }
}
