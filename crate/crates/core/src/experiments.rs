//! Experiment report builders: pairwise comparison matrices between image
//! datasets and the multi-resolution consistency study.
//!
//! Both builders are pure; the CLI handles file IO and plotting.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::{generate_one, ScenarioConfig};
use crate::image::{align_frames, BaseFrame, BinaryImage};
use crate::measures::{summarize, summarize_process, SummaryVector, DEFAULT_DIVISIONS};
use crate::metrics::{compare_images, point_ssim, Metric, MS_SSIM_WEIGHTS};
use crate::point_process::extract;

pub const SCHEMA_VERSION: u32 = 1;

/// A named collection of images, ordered as they should be reported.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub name: String,
    pub images: Vec<(String, BinaryImage)>,
}

impl Dataset {
    /// Dataset with images named `<name>_<index>`.
    pub fn from_images(name: impl Into<String>, images: Vec<BinaryImage>) -> Self {
        let name = name.into();
        let width = images.len().saturating_sub(1).to_string().len().max(3);
        let images = images
            .into_iter()
            .enumerate()
            .map(|(i, img)| (format!("{name}_{i:0width$}"), img))
            .collect();
        Self { name, images }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairScore {
    pub file_a: String,
    pub file_b: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    /// The metric cannot be evaluated on this pair of datasets; reported
    /// as "n/a".
    #[serde(rename = "n/a")]
    NotApplicable {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixCell {
    pub dataset_a: String,
    pub dataset_b: String,
    #[serde(flatten)]
    pub status: CellStatus,
    pub pairs: Vec<PairScore>,
    pub mean: Option<f64>,
    /// Population variance of the pair scores.
    pub variance: Option<f64>,
}

impl MatrixCell {
    pub fn is_diagonal(&self) -> bool {
        self.dataset_a == self.dataset_b
    }

    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn median(&self) -> Option<f64> {
        median(&self.values())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonMatrixReport {
    pub schema_version: u32,
    pub metric: Metric,
    pub dataset_names: Vec<String>,
    /// Upper triangle including the diagonal, row-major over datasets.
    pub cells: Vec<MatrixCell>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ms_ssim_weights: Option<[f64; 5]>,
}

impl ComparisonMatrixReport {
    pub fn cell(&self, a: &str, b: &str) -> Option<&MatrixCell> {
        self.cells
            .iter()
            .find(|c| (c.dataset_a == a && c.dataset_b == b) || (c.dataset_a == b && c.dataset_b == a))
    }
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Computed on values shifted by the first one, so a constant sequence has
/// variance exactly 0.
pub fn population_variance(values: &[f64]) -> Option<f64> {
    let first = *values.first()?;
    let n = values.len() as f64;
    let shifted_mean = values.iter().map(|v| v - first).sum::<f64>() / n;
    let second_moment = values.iter().map(|v| (v - first).powi(2)).sum::<f64>() / n;
    Some((second_moment - shifted_mean * shifted_mean).max(0.0))
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}

/// Index pairs compared in a cell: distinct unordered pairs on the
/// diagonal, the full product off it.
fn cell_pairs(a: usize, b: usize, n_a: usize, n_b: usize) -> Vec<(usize, usize)> {
    if a == b {
        (0..n_a).flat_map(|i| (i + 1..n_a).map(move |j| (i, j))).collect()
    } else {
        (0..n_a).flat_map(|i| (0..n_b).map(move |j| (i, j))).collect()
    }
}

/// Pairwise scores between and within datasets.
///
/// PointSSIM summaries are computed once per image in its own unit frame;
/// the summary vector does not depend on the common extent chosen when
/// frames are aligned, only on the aspect ratio, which is still checked per
/// pair. A cell whose pairs cannot be scored is marked not applicable
/// instead of failing the whole matrix.
pub fn comparison_matrix(datasets: &[Dataset], metric: Metric) -> ComparisonMatrixReport {
    let summaries: Vec<Vec<Result<SummaryVector>>> = if metric == Metric::PointSsim {
        datasets
            .iter()
            .map(|d| {
                d.images
                    .par_iter()
                    .map(|(_, img)| summarize(img, &BaseFrame::unit(img)))
                    .collect()
            })
            .collect()
    } else {
        Vec::new()
    };

    let score = |a: usize, i: usize, b: usize, j: usize| -> Result<f64> {
        let (x, y) = (&datasets[a].images[i].1, &datasets[b].images[j].1);
        if metric == Metric::PointSsim {
            align_frames(x, y)?;
            let sa = summaries[a][i].as_ref().map_err(clone_error)?;
            let sb = summaries[b][j].as_ref().map_err(clone_error)?;
            Ok(point_ssim(sa, sb))
        } else {
            compare_images(x, y, metric).map(|s| s.value)
        }
    };

    let mut cells = Vec::new();
    for a in 0..datasets.len() {
        for b in a..datasets.len() {
            let pairs = cell_pairs(a, b, datasets[a].images.len(), datasets[b].images.len());
            let scored: Result<Vec<PairScore>> = pairs
                .par_iter()
                .map(|&(i, j)| {
                    Ok(PairScore {
                        file_a: datasets[a].images[i].0.clone(),
                        file_b: datasets[b].images[j].0.clone(),
                        value: score(a, i, b, j)?,
                    })
                })
                .collect();
            let cell = match scored {
                Ok(pairs) => {
                    let values: Vec<f64> = pairs.iter().map(|p| p.value).collect();
                    MatrixCell {
                        dataset_a: datasets[a].name.clone(),
                        dataset_b: datasets[b].name.clone(),
                        status: CellStatus::Ok,
                        mean: mean(&values),
                        variance: population_variance(&values),
                        pairs,
                    }
                }
                Err(e) => MatrixCell {
                    dataset_a: datasets[a].name.clone(),
                    dataset_b: datasets[b].name.clone(),
                    status: CellStatus::NotApplicable {
                        reason: format!("{}: {e}", e.kind()),
                    },
                    pairs: Vec::new(),
                    mean: None,
                    variance: None,
                },
            };
            cells.push(cell);
        }
    }

    ComparisonMatrixReport {
        schema_version: SCHEMA_VERSION,
        metric,
        dataset_names: datasets.iter().map(|d| d.name.clone()).collect(),
        cells,
        ms_ssim_weights: (metric == Metric::MsSsim).then_some(MS_SSIM_WEIGHTS),
    }
}

/// Errors are not `Clone`; cached failures are re-raised with their kind
/// preserved where it matters.
fn clone_error(e: &Error) -> Error {
    match e {
        Error::AllForeground => Error::AllForeground,
        other => Error::InvalidImage(other.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SizeRecord {
    pub size: usize,
    pub summary: SummaryVector,
    /// 8-connected objects in the image.
    pub objects: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealizationRecord {
    pub index: usize,
    pub per_size: Vec<SizeRecord>,
}

pub const MEASURE_NAMES: [&str; 4] = ["v1", "v2", "v3", "v4"];

/// One measure of one realization at a low and a high resolution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairedMeasure {
    pub size_low: usize,
    pub size_high: usize,
    pub realization: usize,
    pub measure: &'static str,
    pub low: f64,
    pub high: f64,
    pub relative_deviation: f64,
    /// Fewer objects at the low resolution, i.e. objects merged.
    pub objects_merged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationSummary {
    pub size_low: usize,
    pub size_high: usize,
    pub measure: &'static str,
    pub median_relative_deviation: f64,
    pub merged_realizations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolutionReport {
    pub schema_version: u32,
    /// Scene configuration at the smallest size.
    pub config: ScenarioConfig,
    pub sizes: Vec<usize>,
    pub realizations: Vec<RealizationRecord>,
    pub pairs: Vec<PairedMeasure>,
    pub deviations: Vec<DeviationSummary>,
}

impl ResolutionReport {
    pub fn deviation(&self, size_low: usize, size_high: usize, measure: &str) -> Option<&DeviationSummary> {
        self.deviations
            .iter()
            .find(|d| d.size_low == size_low && d.size_high == size_high && d.measure == measure)
    }
}

/// `|a - b| / max(|a|, |b|)`, 0 when both vanish.
pub fn relative_deviation(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Renders the same scenes at several resolutions and compares their
/// summary vectors.
///
/// `base` fixes the scene (seed, realization count, geometry at
/// `base.size`); it is rescaled to every entry of `sizes`, which must be
/// strictly increasing multiples of the smallest. All images are placed in
/// the base frame of the smallest size.
pub fn resolution_study(base: &ScenarioConfig, sizes: &[usize]) -> Result<ResolutionReport> {
    let smallest = *sizes
        .first()
        .ok_or_else(|| Error::InvalidConfig("at least one size is required".into()))?;
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidConfig("sizes must be strictly increasing".into()));
    }
    if sizes.iter().any(|s| s % smallest != 0) {
        return Err(Error::InvalidConfig("sizes must be multiples of the smallest".into()));
    }
    let configs: Vec<ScenarioConfig> = sizes.iter().map(|&s| base.rescaled(s)).collect();
    for cfg in &configs {
        cfg.validate()?;
    }

    let realizations: Vec<RealizationRecord> = (0..base.count)
        .into_par_iter()
        .map(|index| {
            let per_size = configs
                .iter()
                .map(|cfg| {
                    let img = generate_one(cfg, index)?;
                    let frame = BaseFrame::with_extent(&img, smallest as f64)?;
                    let mpp = extract(&img, &frame)?;
                    Ok(SizeRecord {
                        size: cfg.size,
                        summary: summarize_process(&mpp, DEFAULT_DIVISIONS),
                        objects: mpp.object_count(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RealizationRecord { index, per_size })
        })
        .collect::<Result<_>>()?;

    let mut pairs = Vec::new();
    let mut deviations = Vec::new();
    for lo in 0..sizes.len() {
        for hi in lo + 1..sizes.len() {
            for (m, measure) in MEASURE_NAMES.iter().enumerate() {
                let rows: Vec<PairedMeasure> = realizations
                    .iter()
                    .map(|r| {
                        let (a, b) = (&r.per_size[lo], &r.per_size[hi]);
                        let (low, high) = (a.summary.to_array()[m], b.summary.to_array()[m]);
                        PairedMeasure {
                            size_low: sizes[lo],
                            size_high: sizes[hi],
                            realization: r.index,
                            measure,
                            low,
                            high,
                            relative_deviation: relative_deviation(low, high),
                            objects_merged: a.objects < b.objects,
                        }
                    })
                    .collect();
                let devs: Vec<f64> = rows.iter().map(|p| p.relative_deviation).collect();
                deviations.push(DeviationSummary {
                    size_low: sizes[lo],
                    size_high: sizes[hi],
                    measure,
                    median_relative_deviation: median(&devs).unwrap_or(0.0),
                    merged_realizations: rows.iter().filter(|p| p.objects_merged).count(),
                });
                pairs.extend(rows);
            }
        }
    }

    Ok(ResolutionReport {
        schema_version: SCHEMA_VERSION,
        config: configs[0].clone(),
        sizes: sizes.to_vec(),
        realizations,
        pairs,
        deviations,
    })
}
