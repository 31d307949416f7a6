//! Seeded synthetic binary-image scenarios.
//!
//! Realization `k` of a configuration is drawn from a ChaCha8 generator
//! seeded with `seed` and switched to stream `k`, so every realization can
//! be reproduced on its own, in any order or in parallel.
//!
//! Geometric parameters are in pixels at the configured size. Random
//! placements are drawn in units of the frame side, so rescaling a
//! configuration with [`ScenarioConfig::rescaled`] renders the same scene at
//! a different resolution.
//!
//! Default parameters, at the reference size of 256 pixels:
//!
//! | scenario             | parameters                                                         |
//! |----------------------|--------------------------------------------------------------------|
//! | `structured_ellipses`| 4x4 lattice, semi-axes 14 x 8                                      |
//! | `distorted_ellipses` | 14 objects, semi-axes 14 x 8, size jitter 0.2, noise 0.15         |
//! | `corner_mixture`     | 16 objects, semi-axes 16 x 9, jitter 0.3, margin 0.25, 50% circles |
//! | `*_points`           | 100 points, radius 1 (single pixel)                               |
//! | `smoothed_noise`     | box-blur radius 6, foreground proportion 0.3                       |

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::BinaryImage;

/// Size at which the default parameters are defined.
pub const REFERENCE_SIZE: usize = 256;
pub const MIN_SIZE: usize = 32;

/// Angular samples of the boundary noise of a distorted ellipse.
const DISTORTION_KNOTS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    StructuredEllipses,
    DistortedEllipses,
    CornerMixture,
    RegularPoints,
    RandomPoints,
    ClusteredPoints,
    SmoothedNoise,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::StructuredEllipses,
        Scenario::DistortedEllipses,
        Scenario::CornerMixture,
        Scenario::RegularPoints,
        Scenario::RandomPoints,
        Scenario::ClusteredPoints,
        Scenario::SmoothedNoise,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::StructuredEllipses => "structured_ellipses",
            Scenario::DistortedEllipses => "distorted_ellipses",
            Scenario::CornerMixture => "corner_mixture",
            Scenario::RegularPoints => "regular_points",
            Scenario::RandomPoints => "random_points",
            Scenario::ClusteredPoints => "clustered_points",
            Scenario::SmoothedNoise => "smoothed_noise",
        }
    }

    /// Whether realizations are identical regardless of seed and index.
    pub fn is_deterministic(self) -> bool {
        matches!(self, Scenario::StructuredEllipses | Scenario::RegularPoints)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scenario {s:?}")))
    }
}

/// Scenario parameters. Each scenario reads only the fields relevant to it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    /// Lattice rows and columns of the structured scenario.
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// Objects per image for the random ellipse scenarios.
    pub objects: usize,
    /// Nominal semi-axes in pixels.
    pub semi_major: f64,
    pub semi_minor: f64,
    /// Relative half-width of the uniform size jitter.
    pub size_jitter: f64,
    /// Standard deviation of the relative boundary perturbation.
    pub noise_amplitude: f64,
    /// Side of each corner box as a fraction of the image side.
    pub corner_margin: f64,
    /// Probability that a corner-mixture object is a circle.
    pub circle_fraction: f64,
    /// Points in the point-field scenarios.
    pub points: usize,
    /// Points cover cells strictly closer than this to the point's cell
    /// (in pixels); 1 gives a single pixel.
    pub point_radius: f64,
    /// Half-width of the box blur, applied three times, to white noise.
    pub smoothing_radius: usize,
    /// Target foreground fraction after thresholding the blurred noise.
    pub foreground_proportion: f64,
}

impl ScenarioParams {
    /// Defaults scaled from the reference size to `size`.
    pub fn defaults(scenario: Scenario, size: usize) -> Self {
        let (semi_major, semi_minor, size_jitter, objects) = match scenario {
            Scenario::CornerMixture => (16.0, 9.0, 0.3, 24),
            _ => (14.0, 8.0, 0.2, 20),
        };
        let base = Self {
            grid_rows: 5,
            grid_cols: 5,
            objects,
            semi_major,
            semi_minor,
            size_jitter,
            noise_amplitude: 0.15,
            corner_margin: 0.25,
            circle_fraction: 0.5,
            points: 100,
            point_radius: 1.0,
            smoothing_radius: 6,
            foreground_proportion: 0.3,
        };
        base.scaled(size as f64 / REFERENCE_SIZE as f64)
    }

    /// Multiplies every pixel-valued parameter by `factor`. The point
    /// radius never drops below a single pixel.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            semi_major: self.semi_major * factor,
            semi_minor: self.semi_minor * factor,
            point_radius: (self.point_radius * factor).max(1.0),
            smoothing_radius: ((self.smoothing_radius as f64 * factor).round() as usize).max(1),
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    /// Pixels per side.
    pub size: usize,
    pub seed: u64,
    /// Number of realizations.
    pub count: usize,
    pub params: ScenarioParams,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, size: usize, seed: u64, count: usize) -> Self {
        Self {
            scenario,
            size,
            seed,
            count,
            params: ScenarioParams::defaults(scenario, size),
        }
    }

    /// Same scene at a different pixel size.
    pub fn rescaled(&self, size: usize) -> Self {
        Self {
            size,
            params: self.params.scaled(size as f64 / self.size as f64),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        let size = self.size as f64;
        if self.size < MIN_SIZE {
            return Err(invalid(format!("size must be at least {MIN_SIZE}, got {}", self.size)));
        }
        if self.count == 0 {
            return Err(invalid("count must be at least 1".into()));
        }
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive, got {v}")))
            }
        };
        match self.scenario {
            Scenario::StructuredEllipses => {
                positive("semi_major", p.semi_major)?;
                positive("semi_minor", p.semi_minor)?;
                if p.grid_rows == 0 || p.grid_cols == 0 {
                    return Err(invalid("grid must have at least one row and column".into()));
                }
                // keep a gap of at least two pixels between lattice cells
                let (sx, sy) = (size / p.grid_cols as f64, size / p.grid_rows as f64);
                if 2.0 * p.semi_major + 2.0 > sx || 2.0 * p.semi_minor + 2.0 > sy {
                    return Err(Error::DoesNotFit(format!(
                        "{}x{} lattice of {}x{} ellipses in {} pixels",
                        p.grid_rows, p.grid_cols, p.semi_major, p.semi_minor, self.size
                    )));
                }
            }
            Scenario::DistortedEllipses | Scenario::CornerMixture => {
                positive("semi_major", p.semi_major)?;
                positive("semi_minor", p.semi_minor)?;
                if p.objects == 0 {
                    return Err(invalid("objects must be at least 1".into()));
                }
                if !(0.0..1.0).contains(&p.size_jitter) {
                    return Err(invalid("size_jitter must lie in [0, 1)".into()));
                }
                if self.scenario == Scenario::DistortedEllipses {
                    if !(p.noise_amplitude >= 0.0 && p.noise_amplitude.is_finite()) {
                        return Err(invalid("noise_amplitude must be non-negative".into()));
                    }
                    if 2.0 * object_reach(p, true) >= size {
                        return Err(Error::DoesNotFit(format!(
                            "objects of extent {:.1} in {} pixels",
                            object_reach(p, true),
                            self.size
                        )));
                    }
                } else {
                    if !(p.corner_margin > 0.0 && p.corner_margin < 0.5) {
                        return Err(invalid("corner_margin must lie in (0, 0.5)".into()));
                    }
                    if !(0.0..=1.0).contains(&p.circle_fraction) {
                        return Err(invalid("circle_fraction must lie in [0, 1]".into()));
                    }
                    if p.corner_margin * size + object_reach(p, false) >= size / 2.0 {
                        return Err(Error::DoesNotFit("corner objects would cover the image centre".into()));
                    }
                }
            }
            Scenario::RegularPoints | Scenario::RandomPoints | Scenario::ClusteredPoints => {
                positive("point_radius", p.point_radius)?;
                if p.points == 0 || p.points >= self.size * self.size {
                    return Err(invalid(format!(
                        "points must lie in 1..{}, got {}",
                        self.size * self.size,
                        p.points
                    )));
                }
                if self.scenario == Scenario::RegularPoints {
                    let k = lattice_side(p.points);
                    if 2.0 * p.point_radius > size / k as f64 {
                        return Err(Error::DoesNotFit("lattice points would touch".into()));
                    }
                }
            }
            Scenario::SmoothedNoise => {
                if p.smoothing_radius == 0 {
                    return Err(invalid("smoothing_radius must be at least 1".into()));
                }
                if !(p.foreground_proportion > 0.0 && p.foreground_proportion < 1.0) {
                    return Err(invalid("foreground_proportion must lie in (0, 1)".into()));
                }
            }
        }
        Ok(())
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidConfig(msg)
}

/// Largest distance from an object's centre to its boundary.
fn object_reach(p: &ScenarioParams, distorted: bool) -> f64 {
    let distortion = if distorted {
        1.0 + clamp_noise_bound(p.noise_amplitude)
    } else {
        1.0
    };
    p.semi_major.max(p.semi_minor) * (1.0 + p.size_jitter) * distortion
}

/// Upper bound of the relative boundary perturbation.
fn clamp_noise_bound(amplitude: f64) -> f64 {
    (3.0 * amplitude).min(0.5)
}

fn lattice_side(points: usize) -> usize {
    (points as f64).sqrt().ceil() as usize
}

/// Generator for realization `index`.
pub fn realization_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// All `cfg.count` realizations, generated in parallel.
pub fn generate(cfg: &ScenarioConfig) -> Result<Vec<BinaryImage>> {
    cfg.validate()?;
    (0..cfg.count)
        .into_par_iter()
        .map(|k| generate_unchecked(cfg, k))
        .collect()
}

/// Realization `index` alone.
pub fn generate_one(cfg: &ScenarioConfig, index: usize) -> Result<BinaryImage> {
    cfg.validate()?;
    generate_unchecked(cfg, index)
}

fn generate_unchecked(cfg: &ScenarioConfig, index: usize) -> Result<BinaryImage> {
    let mut rng = realization_rng(cfg.seed, index);
    let img = match cfg.scenario {
        Scenario::StructuredEllipses => structured_ellipses(cfg),
        Scenario::DistortedEllipses => distorted_ellipses(cfg, &mut rng),
        Scenario::CornerMixture => corner_mixture(cfg, &mut rng),
        Scenario::RegularPoints => regular_points(cfg),
        Scenario::RandomPoints => random_points(cfg, &mut rng),
        Scenario::ClusteredPoints => clustered_points(cfg, &mut rng),
        Scenario::SmoothedNoise => smoothed_noise(cfg, &mut rng),
    };
    debug_assert!(img.has_background());
    Ok(img)
}

pub fn gen_structured_ellipses(cfg: &ScenarioConfig) -> Result<Vec<BinaryImage>> {
    expect_scenario(cfg, Scenario::StructuredEllipses)?;
    generate(cfg)
}

pub fn gen_distorted_ellipses(cfg: &ScenarioConfig) -> Result<Vec<BinaryImage>> {
    expect_scenario(cfg, Scenario::DistortedEllipses)?;
    generate(cfg)
}

pub fn gen_corner_mixture(cfg: &ScenarioConfig) -> Result<Vec<BinaryImage>> {
    expect_scenario(cfg, Scenario::CornerMixture)?;
    generate(cfg)
}

pub fn gen_point_fields(cfg: &ScenarioConfig) -> Result<Vec<BinaryImage>> {
    match cfg.scenario {
        Scenario::RegularPoints | Scenario::RandomPoints | Scenario::ClusteredPoints => generate(cfg),
        other => Err(invalid(format!("{other} is not a point-field scenario"))),
    }
}

pub fn gen_smoothed_noise(cfg: &ScenarioConfig) -> Result<Vec<BinaryImage>> {
    expect_scenario(cfg, Scenario::SmoothedNoise)?;
    generate(cfg)
}

fn expect_scenario(cfg: &ScenarioConfig, scenario: Scenario) -> Result<()> {
    if cfg.scenario == scenario {
        Ok(())
    } else {
        Err(invalid(format!(
            "expected a {scenario} configuration, got {}",
            cfg.scenario
        )))
    }
}

/// Filled shape described by its centre and a star-shaped boundary.
struct Shape<F: Fn(f64, f64) -> bool> {
    cx: f64,
    cy: f64,
    reach: f64,
    inside: F,
}

/// Sets every cell whose centre lies inside `shape`. Cells outside the
/// image are clipped.
fn paint<F: Fn(f64, f64) -> bool>(img: &mut BinaryImage, shape: &Shape<F>) {
    let (rows, cols) = (img.rows() as f64, img.cols() as f64);
    let r0 = (shape.cy - shape.reach - 1.0).floor().max(0.0) as usize;
    let r1 = (shape.cy + shape.reach + 1.0).ceil().min(rows) as usize;
    let c0 = (shape.cx - shape.reach - 1.0).floor().max(0.0) as usize;
    let c1 = (shape.cx + shape.reach + 1.0).ceil().min(cols) as usize;
    for r in r0..r1 {
        for c in c0..c1 {
            let (dx, dy) = (c as f64 + 0.5 - shape.cx, r as f64 + 0.5 - shape.cy);
            if (shape.inside)(dx, dy) {
                img.set(r, c, true);
            }
        }
    }
}

fn ellipse(cx: f64, cy: f64, a: f64, b: f64, theta: f64) -> Shape<impl Fn(f64, f64) -> bool> {
    let (sin, cos) = theta.sin_cos();
    Shape {
        cx,
        cy,
        reach: a.max(b),
        inside: move |dx: f64, dy: f64| {
            let u = dx * cos + dy * sin;
            let v = -dx * sin + dy * cos;
            (u / a).powi(2) + (v / b).powi(2) <= 1.0
        },
    }
}

fn structured_ellipses(cfg: &ScenarioConfig) -> BinaryImage {
    let p = &cfg.params;
    let size = cfg.size as f64;
    let (sx, sy) = (size / p.grid_cols as f64, size / p.grid_rows as f64);
    let mut img = BinaryImage::zeros(cfg.size, cfg.size);
    for i in 0..p.grid_rows {
        for j in 0..p.grid_cols {
            let (cx, cy) = ((j as f64 + 0.5) * sx, (i as f64 + 0.5) * sy);
            paint(&mut img, &ellipse(cx, cy, p.semi_major, p.semi_minor, 0.0));
        }
    }
    img
}

fn jittered(rng: &mut impl Rng, value: f64, jitter: f64) -> f64 {
    if jitter == 0.0 {
        value
    } else {
        value * rng.random_range(1.0 - jitter..=1.0 + jitter)
    }
}

/// Smooth random relative perturbation of a boundary as a function of angle.
fn boundary_noise(rng: &mut impl Rng, amplitude: f64) -> [f64; DISTORTION_KNOTS] {
    let mut raw = [0.0; DISTORTION_KNOTS];
    if amplitude > 0.0 {
        let normal = Normal::new(0.0, amplitude).expect("finite amplitude");
        for v in &mut raw {
            *v = normal.sample(rng);
        }
    }
    // circular three-tap smoothing, then clamp so the shape stays star-shaped
    let bound = clamp_noise_bound(amplitude);
    let mut smooth = [0.0; DISTORTION_KNOTS];
    for (k, s) in smooth.iter_mut().enumerate() {
        let prev = raw[(k + DISTORTION_KNOTS - 1) % DISTORTION_KNOTS];
        let next = raw[(k + 1) % DISTORTION_KNOTS];
        *s = ((prev + 2.0 * raw[k] + next) / 4.0).clamp(-bound, bound);
    }
    smooth
}

fn distorted_ellipse(
    cx: f64,
    cy: f64,
    a: f64,
    b: f64,
    theta: f64,
    noise: [f64; DISTORTION_KNOTS],
) -> Shape<impl Fn(f64, f64) -> bool> {
    let bound = noise.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Shape {
        cx,
        cy,
        reach: a.max(b) * (1.0 + bound),
        inside: move |dx: f64, dy: f64| {
            let phi = dy.atan2(dx);
            let local = phi - theta;
            let base = a * b / ((b * local.cos()).powi(2) + (a * local.sin()).powi(2)).sqrt();
            let t = (phi.rem_euclid(TAU) / TAU) * DISTORTION_KNOTS as f64;
            let k = (t.floor() as usize) % DISTORTION_KNOTS;
            let frac = t - t.floor();
            let n = noise[k] * (1.0 - frac) + noise[(k + 1) % DISTORTION_KNOTS] * frac;
            dx * dx + dy * dy <= (base * (1.0 + n)).powi(2)
        },
    }
}

fn distorted_ellipses(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> BinaryImage {
    let p = &cfg.params;
    let size = cfg.size as f64;
    let margin = object_reach(p, true);
    let mut img = BinaryImage::zeros(cfg.size, cfg.size);
    for _ in 0..p.objects {
        // uniform in the region where the whole object stays in frame
        let cx = margin + rng.random::<f64>() * (size - 2.0 * margin);
        let cy = margin + rng.random::<f64>() * (size - 2.0 * margin);
        let a = jittered(rng, p.semi_major, p.size_jitter);
        let b = jittered(rng, p.semi_minor, p.size_jitter);
        let theta = rng.random::<f64>() * PI;
        let noise = boundary_noise(rng, p.noise_amplitude);
        paint(&mut img, &distorted_ellipse(cx, cy, a, b, theta, noise));
    }
    img
}

fn corner_mixture(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> BinaryImage {
    let p = &cfg.params;
    let size = cfg.size as f64;
    let box_side = p.corner_margin * size;
    let mut img = BinaryImage::zeros(cfg.size, cfg.size);
    for _ in 0..p.objects {
        let corner = rng.random_range(0..4u8);
        let mut cx = rng.random::<f64>() * box_side;
        let mut cy = rng.random::<f64>() * box_side;
        if corner & 1 == 1 {
            cx = size - cx;
        }
        if corner & 2 == 2 {
            cy = size - cy;
        }
        if rng.random::<f64>() < p.circle_fraction {
            let r = rng.random_range(p.semi_minor..=p.semi_major)
                * rng.random_range(1.0 - p.size_jitter..=1.0 + p.size_jitter);
            paint(&mut img, &ellipse(cx, cy, r, r, 0.0));
        } else {
            let a = jittered(rng, p.semi_major, p.size_jitter);
            let b = jittered(rng, p.semi_minor, p.size_jitter);
            let theta = rng.random::<f64>() * PI;
            paint(&mut img, &ellipse(cx, cy, a, b, theta));
        }
    }
    img
}

fn dot(img: &mut BinaryImage, row: usize, col: usize, radius: f64) {
    let (cx, cy) = (col as f64 + 0.5, row as f64 + 0.5);
    paint(
        img,
        &Shape {
            cx,
            cy,
            reach: radius,
            inside: move |dx: f64, dy: f64| dx * dx + dy * dy < radius * radius,
        },
    );
}

/// Points on a `k x k` lattice placed at the centres of a `k x k`
/// partition of the frame (with 100 points, one per quadrat).
fn regular_points(cfg: &ScenarioConfig) -> BinaryImage {
    let p = &cfg.params;
    let k = lattice_side(p.points);
    let step = cfg.size as f64 / k as f64;
    let mut img = BinaryImage::zeros(cfg.size, cfg.size);
    for i in 0..p.points {
        let (gi, gj) = (i / k, i % k);
        let row = ((gi as f64 + 0.5) * step).floor() as usize;
        let col = ((gj as f64 + 0.5) * step).floor() as usize;
        dot(&mut img, row, col, p.point_radius);
    }
    img
}

fn random_points(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> BinaryImage {
    let p = &cfg.params;
    let mut img = BinaryImage::zeros(cfg.size, cfg.size);
    for _ in 0..p.points {
        let row = rng.random_range(0..cfg.size);
        let col = rng.random_range(0..cfg.size);
        dot(&mut img, row, col, p.point_radius);
    }
    img
}

/// Pixel range whose centres fall in the `k`-th of ten equal slabs.
fn quadrat_pixels(size: usize, k: usize) -> std::ops::Range<usize> {
    let width = size as f64 / 10.0;
    let lo = (k as f64 * width - 0.5).ceil().max(0.0) as usize;
    let hi = (((k + 1) as f64 * width - 0.5).ceil() as usize).min(size);
    lo..hi
}

/// All points inside one randomly chosen cell of the 10x10 quadrat grid,
/// shrunk by the point radius so the dots stay inside it.
fn clustered_points(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> BinaryImage {
    let p = &cfg.params;
    let rows = quadrat_pixels(cfg.size, rng.random_range(0..10));
    let cols = quadrat_pixels(cfg.size, rng.random_range(0..10));
    let inset = (p.point_radius.ceil() as usize).saturating_sub(1);
    let shrink = |r: std::ops::Range<usize>| {
        if r.len() > 2 * inset {
            r.start + inset..r.end - inset
        } else {
            r
        }
    };
    let (rows, cols) = (shrink(rows), shrink(cols));
    let mut img = BinaryImage::zeros(cfg.size, cfg.size);
    for _ in 0..p.points {
        let row = rng.random_range(rows.clone());
        let col = rng.random_range(cols.clone());
        dot(&mut img, row, col, p.point_radius);
    }
    img
}

/// Separable box blur with windows truncated at the borders.
fn box_blur(values: &[f64], size: usize, radius: usize) -> Vec<f64> {
    let blur_line = |line: &[f64], out: &mut [f64]| {
        let mut prefix = vec![0.0; line.len() + 1];
        for (i, v) in line.iter().enumerate() {
            prefix[i + 1] = prefix[i] + v;
        }
        for (i, o) in out.iter_mut().enumerate() {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius + 1).min(line.len());
            *o = (prefix[hi] - prefix[lo]) / (hi - lo) as f64;
        }
    };
    let mut horizontal = vec![0.0; values.len()];
    for r in 0..size {
        blur_line(
            &values[r * size..(r + 1) * size],
            &mut horizontal[r * size..(r + 1) * size],
        );
    }
    let mut out = vec![0.0; values.len()];
    let mut column = vec![0.0; size];
    let mut blurred = vec![0.0; size];
    for c in 0..size {
        for r in 0..size {
            column[r] = horizontal[r * size + c];
        }
        blur_line(&column, &mut blurred);
        for r in 0..size {
            out[r * size + c] = blurred[r];
        }
    }
    out
}

/// Repeated box blurs approximate a Gaussian kernel and give smooth
/// threshold boundaries; a single pass leaves them ragged.
const BLUR_PASSES: usize = 3;

/// Blurred white noise thresholded so that exactly
/// `round(proportion * size^2)` cells are foreground.
fn smoothed_noise(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> BinaryImage {
    let p = &cfg.params;
    let n = cfg.size * cfg.size;
    let noise: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let field = (0..BLUR_PASSES).fold(noise, |f, _| box_blur(&f, cfg.size, p.smoothing_radius));
    let keep = ((p.foreground_proportion * n as f64).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| field[j].total_cmp(&field[i]).then(i.cmp(&j)));
    let mut cells = vec![0u8; n];
    for &i in &order[..keep] {
        cells[i] = 1;
    }
    BinaryImage::new(cfg.size, cfg.size, cells).expect("valid dimensions")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::morphology::connected_components;

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
            let json = serde_json::to_string(&s).unwrap();
            assert_eq!(json, format!("\"{}\"", s.name()));
        }
    }

    #[test]
    fn structured_batch_is_identical_and_seed_free() {
        let cfg = ScenarioConfig::new(Scenario::StructuredEllipses, 128, 1, 50);
        let batch = gen_structured_ellipses(&cfg).unwrap();
        assert_eq!(batch.len(), 50);
        assert!(batch.iter().all(|img| img == &batch[0]));
        let other = ScenarioConfig {
            seed: 99,
            ..cfg.clone()
        };
        assert_eq!(generate_one(&other, 7).unwrap(), batch[0]);
        assert_eq!(connected_components(&batch[0]).count(), 25);
    }

    #[test]
    fn structured_grid_counts() {
        let mut cfg = ScenarioConfig::new(Scenario::StructuredEllipses, 64, 0, 1);
        cfg.params.grid_rows = 1;
        cfg.params.grid_cols = 1;
        cfg.params.semi_major = 10.0;
        cfg.params.semi_minor = 10.0;
        assert_eq!(connected_components(&generate_one(&cfg, 0).unwrap()).count(), 1);
        cfg.params.grid_rows = 3;
        cfg.params.grid_cols = 3;
        cfg.params.semi_major = 6.0;
        cfg.params.semi_minor = 4.0;
        assert_eq!(connected_components(&generate_one(&cfg, 0).unwrap()).count(), 9);
        cfg.params.semi_major = 12.0;
        assert_eq!(generate(&cfg).unwrap_err().kind(), "DoesNotFit");
    }

    #[test]
    fn determinism_per_index() {
        for scenario in Scenario::ALL {
            let cfg = ScenarioConfig::new(scenario, 64, 42, 4);
            let a = generate(&cfg).unwrap();
            let b = generate(&cfg).unwrap();
            assert_eq!(a, b, "{scenario}");
            assert_eq!(generate_one(&cfg, 3).unwrap(), a[3], "{scenario}");
            assert!(a.iter().all(|img| img.has_background()));
            if !scenario.is_deterministic() {
                assert_ne!(a[0], a[1], "{scenario}");
                let other = ScenarioConfig {
                    seed: 43,
                    ..cfg.clone()
                };
                assert_ne!(generate_one(&other, 0).unwrap(), a[0], "{scenario}");
            }
        }
    }

    #[test]
    fn zero_noise_gives_plain_ellipses() {
        let mut cfg = ScenarioConfig::new(Scenario::DistortedEllipses, 96, 5, 1);
        cfg.params.noise_amplitude = 0.0;
        cfg.params.objects = 1;
        cfg.params.size_jitter = 0.0;
        let img = generate_one(&cfg, 0).unwrap();
        // compare area against the analytic ellipse area
        let area = PI * cfg.params.semi_major * cfg.params.semi_minor;
        let got = img.foreground_count() as f64;
        assert!((got - area).abs() / area < 0.1, "{got} vs {area}");
        assert_eq!(connected_components(&img).count(), 1);
    }

    #[test]
    fn corner_objects_stay_near_corners() {
        let cfg = ScenarioConfig::new(Scenario::CornerMixture, 256, 11, 10);
        let p = &cfg.params;
        let reach = p.semi_major.max(p.semi_minor) * (1.0 + p.size_jitter);
        let limit = p.corner_margin * 256.0 + reach;
        for img in generate(&cfg).unwrap() {
            for r in 0..256 {
                for c in 0..256 {
                    if img.is_foreground(r, c) {
                        let (x, y) = (c as f64 + 0.5, r as f64 + 0.5);
                        assert!(x.min(256.0 - x) <= limit && y.min(256.0 - y) <= limit);
                    }
                }
            }
        }
        let mut bad = cfg.clone();
        bad.params.corner_margin = 0.5;
        assert!(generate(&bad).is_err());
    }

    #[test]
    fn regular_points_one_per_quadrat() {
        let cfg = ScenarioConfig::new(Scenario::RegularPoints, 256, 0, 1);
        let img = generate_one(&cfg, 0).unwrap();
        assert_eq!(img.foreground_count(), 100);
    }

    #[test]
    fn clustered_points_stay_in_one_quadrat() {
        let mut cfg = ScenarioConfig::new(Scenario::ClusteredPoints, 256, 3, 5);
        cfg.params.points = 500;
        for img in generate(&cfg).unwrap() {
            let mut quadrats = std::collections::HashSet::new();
            for r in 0..256 {
                for c in 0..256 {
                    if img.is_foreground(r, c) {
                        let q = |v: usize| (((v as f64 + 0.5) / 25.6).floor() as usize).min(9);
                        quadrats.insert((q(r), q(c)));
                    }
                }
            }
            assert_eq!(quadrats.len(), 1);
        }
    }

    #[test]
    fn smoothed_noise_hits_target_proportion() {
        let mut cfg = ScenarioConfig::new(Scenario::SmoothedNoise, 128, 8, 3);
        cfg.params.foreground_proportion = 0.3;
        for img in generate(&cfg).unwrap() {
            let frac = img.foreground_count() as f64 / img.len() as f64;
            assert!((frac - 0.3).abs() <= 0.01, "{frac}");
        }
    }

    #[test]
    fn more_smoothing_fewer_components() {
        let mean_components = |radius: usize| {
            let mut cfg = ScenarioConfig::new(Scenario::SmoothedNoise, 128, 21, 6);
            cfg.params.smoothing_radius = radius;
            let batch = generate(&cfg).unwrap();
            batch
                .iter()
                .map(|img| connected_components(img).count() as f64)
                .sum::<f64>()
                / batch.len() as f64
        };
        let (fine, coarse) = (mean_components(1), mean_components(8));
        assert!(coarse < fine, "{coarse} !< {fine}");
    }

    #[test]
    fn rescaled_keeps_scene() {
        let cfg = ScenarioConfig::new(Scenario::CornerMixture, 128, 4, 1);
        let big = cfg.rescaled(512);
        assert_eq!(big.params.semi_major, cfg.params.semi_major * 4.0);
        let lo = generate_one(&cfg, 0).unwrap();
        let hi = generate_one(&big, 0).unwrap();
        let frac = |img: &BinaryImage| img.foreground_count() as f64 / img.len() as f64;
        assert!((frac(&lo) - frac(&hi)).abs() < 0.01);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = ScenarioConfig::new(Scenario::RandomPoints, 16, 0, 1);
        assert_eq!(cfg.validate().unwrap_err().kind(), "InvalidConfig");
        cfg.size = 64;
        cfg.count = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ScenarioConfig::new(Scenario::SmoothedNoise, 64, 0, 1);
        cfg.params.foreground_proportion = 1.0;
        assert!(cfg.validate().is_err());
        assert!(gen_point_fields(&ScenarioConfig::new(Scenario::CornerMixture, 64, 0, 1)).is_err());
    }
}
