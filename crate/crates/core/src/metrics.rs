//! PointSSIM and the pixel-based baselines it is benchmarked against.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{align_frames, BinaryImage};
use crate::measures::{summarize, SummaryVector};

/// Dynamic range of binary pixel values.
const DYNAMIC_RANGE: f64 = 1.0;
pub const SSIM_C1: f64 = (0.01 * DYNAMIC_RANGE) * (0.01 * DYNAMIC_RANGE);
pub const SSIM_C2: f64 = (0.03 * DYNAMIC_RANGE) * (0.03 * DYNAMIC_RANGE);

/// Per-scale exponents of Wang, Simoncelli & Bovik (2003), finest first.
/// The last entry also weights the luminance term.
pub const MS_SSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];
pub const MS_SSIM_MIN_SIDE: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "pointssim")]
    PointSsim,
    #[serde(rename = "mse")]
    Mse,
    #[serde(rename = "ssim")]
    Ssim,
    #[serde(rename = "msssim")]
    MsSsim,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::PointSsim, Metric::Mse, Metric::Ssim, Metric::MsSsim];

    pub fn name(self) -> &'static str {
        match self {
            Metric::PointSsim => "pointssim",
            Metric::Mse => "mse",
            Metric::Ssim => "ssim",
            Metric::MsSsim => "msssim",
        }
    }

    /// Whether the metric requires both images to share pixel dimensions.
    pub fn needs_equal_dimensions(self) -> bool {
        !matches!(self, Metric::PointSsim)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMetric(s.to_owned()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonScore {
    pub metric: Metric,
    pub value: f64,
    /// Summary vectors of both images, present for PointSSIM only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub summaries: Option<(SummaryVector, SummaryVector)>,
}

/// `1 - (sum_{i<=3} (a_i - b_i)^2 / max(a_i, b_i)^2 + (a_4 - b_4)^2) / 4`.
///
/// A term whose larger value is zero contributes nothing.
pub fn point_ssim(a: &SummaryVector, b: &SummaryVector) -> f64 {
    let normalized = |x: f64, y: f64| {
        let m = x.max(y);
        if m == 0.0 {
            0.0
        } else {
            ((x - y) / m).powi(2)
        }
    };
    let distance = normalized(a.v1, b.v1) + normalized(a.v2, b.v2) + normalized(a.v3, b.v3) + (a.v4 - b.v4).powi(2);
    1.0 - distance / 4.0
}

fn check_dimensions(a: &BinaryImage, b: &BinaryImage) -> Result<()> {
    if a.rows() != b.rows() || a.cols() != b.cols() {
        return Err(Error::DimensionMismatch {
            rows1: a.rows(),
            cols1: a.cols(),
            rows2: b.rows(),
            cols2: b.cols(),
        });
    }
    Ok(())
}

/// Mean squared per-pixel difference.
pub fn mse(a: &BinaryImage, b: &BinaryImage) -> Result<f64> {
    check_dimensions(a, b)?;
    let differing = a.cells().iter().zip(b.cells()).filter(|(x, y)| x != y).count();
    Ok(differing as f64 / a.len() as f64)
}

/// Whole-image moments with the `n - 1` divisor (falls back to 1 for a
/// single pixel).
struct Moments {
    mean_x: f64,
    mean_y: f64,
    var_x: f64,
    var_y: f64,
    cov: f64,
}

impl Moments {
    fn of(x: &[f64], y: &[f64]) -> Self {
        let n = x.len() as f64;
        let mean_x = x.iter().sum::<f64>() / n;
        let mean_y = y.iter().sum::<f64>() / n;
        let (mut var_x, mut var_y, mut cov) = (0.0, 0.0, 0.0);
        for (&a, &b) in x.iter().zip(y) {
            let (dx, dy) = (a - mean_x, b - mean_y);
            var_x += dx * dx;
            var_y += dy * dy;
            cov += dx * dy;
        }
        let div = (n - 1.0).max(1.0);
        Self {
            mean_x,
            mean_y,
            var_x: var_x / div,
            var_y: var_y / div,
            cov: cov / div,
        }
    }

    fn luminance(&self) -> f64 {
        (2.0 * self.mean_x * self.mean_y + SSIM_C1) / (self.mean_x * self.mean_x + self.mean_y * self.mean_y + SSIM_C1)
    }

    fn contrast_structure(&self) -> f64 {
        (2.0 * self.cov + SSIM_C2) / (self.var_x + self.var_y + SSIM_C2)
    }
}

fn as_plane(img: &BinaryImage) -> Vec<f64> {
    img.cells().iter().map(|&v| v as f64).collect()
}

/// Global SSIM: one window covering the whole image. Can be negative for
/// anticorrelated images.
pub fn ssim(a: &BinaryImage, b: &BinaryImage) -> Result<f64> {
    check_dimensions(a, b)?;
    let m = Moments::of(&as_plane(a), &as_plane(b));
    Ok(m.luminance() * m.contrast_structure())
}

/// 2x2 mean pooling; a trailing odd row or column is dropped.
fn downsample(plane: &[f64], rows: usize, cols: usize) -> (Vec<f64>, usize, usize) {
    let (r2, c2) = (rows / 2, cols / 2);
    let mut out = Vec::with_capacity(r2 * c2);
    for r in 0..r2 {
        for c in 0..c2 {
            let i = 2 * r * cols + 2 * c;
            out.push((plane[i] + plane[i + 1] + plane[i + cols] + plane[i + cols + 1]) / 4.0);
        }
    }
    (out, r2, c2)
}

/// Multi-scale SSIM over five dyadic scales using global moments at each
/// scale. Negative contrast-structure factors are clamped to zero before
/// exponentiation.
pub fn ms_ssim(a: &BinaryImage, b: &BinaryImage) -> Result<f64> {
    check_dimensions(a, b)?;
    if a.rows() < MS_SSIM_MIN_SIDE || a.cols() < MS_SSIM_MIN_SIDE {
        return Err(Error::TooSmall {
            rows: a.rows(),
            cols: a.cols(),
            min: MS_SSIM_MIN_SIDE,
        });
    }
    let (mut x, mut y) = (as_plane(a), as_plane(b));
    let (mut rows, mut cols) = (a.rows(), a.cols());
    let mut value = 1.0;
    for (scale, &weight) in MS_SSIM_WEIGHTS.iter().enumerate() {
        let m = Moments::of(&x, &y);
        value *= m.contrast_structure().max(0.0).powf(weight);
        if scale + 1 == MS_SSIM_WEIGHTS.len() {
            value *= m.luminance().powf(weight);
        } else {
            let (nx, r2, c2) = downsample(&x, rows, cols);
            let (ny, _, _) = downsample(&y, rows, cols);
            (x, y, rows, cols) = (nx, ny, r2, c2);
        }
    }
    Ok(value)
}

/// Single entry point for all metrics. PointSSIM accepts images of
/// different resolution (same aspect ratio); the baselines do not.
pub fn compare_images(a: &BinaryImage, b: &BinaryImage, metric: Metric) -> Result<ComparisonScore> {
    let (value, summaries) = match metric {
        Metric::PointSsim => {
            let (fa, fb) = align_frames(a, b)?;
            let (sa, sb) = (summarize(a, &fa)?, summarize(b, &fb)?);
            (point_ssim(&sa, &sb), Some((sa, sb)))
        }
        Metric::Mse => (mse(a, b)?, None),
        Metric::Ssim => (ssim(a, b)?, None),
        Metric::MsSsim => (ms_ssim(a, b)?, None),
    };
    Ok(ComparisonScore {
        metric,
        value,
        summaries,
    })
}
