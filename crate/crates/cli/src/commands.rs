use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use pointssim::experiments::{comparison_matrix, resolution_study, CellStatus, Dataset, SCHEMA_VERSION};
use pointssim::generators;
use pointssim::measures::summarize_with;
use pointssim::{compare_images, extract, load_image, save_image, BaseFrame, BinaryImage, Error, Metric, Scenario};
use pointssim::{ScenarioConfig, SummaryVector};
use serde::Serialize;
use serde_json::json;

use crate::plot;

/// A command failure. Input and contract errors exit with 2, anything else
/// with 3.
#[derive(Debug)]
pub enum Failure {
    Input(Error),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Failure::Input(e) => json!({ "error": e.kind(), "message": e.to_string() }),
            Failure::Internal(msg) => json!({ "error": "Internal", "message": msg }),
        }
    }
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Internal(e.to_string())
}

fn write_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Input(Error::WriteFailure {
        path: path.to_owned(),
        reason: e.to_string(),
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| write_failure(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(internal)?;
    write_file(path, &(text + "\n"))
}

/// `<prefix><suffix>`, keeping the prefix's directory.
fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn frame_for(img: &BinaryImage, extent: Option<f64>) -> Result<BaseFrame, Failure> {
    match extent {
        None => Ok(BaseFrame::unit(img)),
        Some(l) if l > 0.0 && l.is_finite() => Ok(BaseFrame::with_extent(img, l)?),
        Some(l) => Err(Error::InvalidConfig(format!("frame extent must be positive, got {l}")).into()),
    }
}

pub fn compare(a: &Path, b: &Path, metric: Metric) -> Result<(), Failure> {
    let (x, y) = (load_image(a)?, load_image(b)?);
    let score = compare_images(&x, &y, metric)?;
    let mut out = json!({ "metric": score.metric.name(), "value": score.value });
    if let Some((sa, sb)) = score.summaries {
        out["v_x1"] = json!(sa.to_array());
        out["v_x2"] = json!(sb.to_array());
    }
    println!("{out}");
    Ok(())
}

#[derive(Serialize)]
struct MeasureRow<'a> {
    file: &'a str,
    v1: f64,
    v2: f64,
    v3: f64,
    v4: f64,
}

pub fn measures(images: &[PathBuf], quadrats: usize, extent: Option<f64>, json: bool) -> Result<(), Failure> {
    if quadrats == 0 {
        return Err(Error::InvalidConfig("quadrats must be positive".into()).into());
    }
    let mut summaries: Vec<(String, SummaryVector)> = Vec::with_capacity(images.len());
    for path in images {
        let img = load_image(path)?;
        let v = summarize_with(&img, &frame_for(&img, extent)?, quadrats)?;
        summaries.push((path.display().to_string(), v));
    }
    let stdout = io::stdout();
    if json {
        let value = match summaries.as_slice() {
            [(_, v)] => json!(v),
            many => json!(many
                .iter()
                .map(|(file, v)| json!({ "file": file, "v1": v.v1, "v2": v.v2, "v3": v.v3, "v4": v.v4 }))
                .collect::<Vec<_>>()),
        };
        println!("{value}");
    } else {
        let mut w = csv::Writer::from_writer(stdout.lock());
        for (file, v) in &summaries {
            w.serialize(MeasureRow {
                file,
                v1: v.v1,
                v2: v.v2,
                v3: v.v3,
                v4: v.v4,
            })
            .map_err(internal)?;
        }
        w.flush().map_err(internal)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct AnchorRow {
    x: f64,
    y: f64,
    radius: f64,
    label: u32,
}

pub fn anchors(image: &Path, out: Option<&Path>, extent: Option<f64>) -> Result<(), Failure> {
    let img = load_image(image)?;
    let mpp = extract(&img, &frame_for(&img, extent)?)?;
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(fs::File::create(path).map_err(|e| write_failure(path, e))?),
        None => Box::new(io::stdout().lock()),
    };
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(sink);
    let target = out.unwrap_or(Path::new("-"));
    // an empty process still gets its header line
    w.write_record(["x", "y", "radius", "label"])
        .map_err(|e| write_failure(target, e))?;
    for a in mpp.anchors() {
        w.serialize(AnchorRow {
            x: a.x,
            y: a.y,
            radius: a.radius,
            label: a.label,
        })
        .map_err(|e| write_failure(target, e))?;
    }
    w.flush().map_err(|e| write_failure(target, e))
}

pub fn read_config(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|source| Error::UnreadableFile {
        path: path.to_owned(),
        source,
    })?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    // accept a bare configuration or a manifest that embeds one
    let config = value.get("config").cloned().unwrap_or(value);
    serde_json::from_value(config).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())).into())
}

pub fn generate(cfg: &ScenarioConfig, out: &Path) -> Result<(), Failure> {
    let images = generators::generate(cfg)?;
    fs::create_dir_all(out).map_err(|e| write_failure(out, e))?;
    let files: Vec<String> = (0..cfg.count)
        .map(|i| format!("{}_{}_{i:03}.png", cfg.scenario, cfg.seed))
        .collect();
    for (img, name) in images.iter().zip(&files) {
        save_image(img, out.join(name))?;
    }
    write_json(
        &out.join("manifest.json"),
        &json!({ "schema_version": SCHEMA_VERSION, "config": cfg, "files": files }),
    )?;
    println!(
        "{}",
        json!({ "written": files.len(), "out": out.display().to_string() })
    );
    Ok(())
}

fn is_image_file(path: &Path) -> bool {
    matches!(
        path.extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase)
            .as_deref(),
        Some("png" | "pgm")
    )
}

/// Images of a directory in lexicographic file-name order.
fn load_dataset(dir: &Path, name: String) -> Result<Dataset, Failure> {
    let entries = fs::read_dir(dir).map_err(|source| Error::UnreadableFile {
        path: dir.to_owned(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_image_file(p))
        .collect();
    paths.sort();
    if paths.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "{} holds {} images, at least 2 are needed",
            dir.display(),
            paths.len()
        ))
        .into());
    }
    let images = paths
        .iter()
        .map(|p| {
            let file = p
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default();
            Ok((file, load_image(p)?))
        })
        .collect::<Result<_, Failure>>()?;
    Ok(Dataset { name, images })
}

/// Dataset names from the directory names, made unique by a numeric
/// suffix when the same name appears twice.
fn dataset_names(dirs: &[PathBuf]) -> Vec<String> {
    let mut names: Vec<String> = Vec::new();
    for dir in dirs {
        let base = dir
            .file_name()
            .map(|f| f.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        let mut name = base.clone();
        let mut k = 2;
        while names.contains(&name) {
            name = format!("{base}_{k}");
            k += 1;
        }
        names.push(name);
    }
    names
}

#[derive(Serialize)]
struct PairRow<'a> {
    dataset_a: &'a str,
    dataset_b: &'a str,
    file_a: &'a str,
    file_b: &'a str,
    metric: &'a str,
    value: f64,
}

#[derive(Serialize)]
struct CellRow<'a> {
    dataset_a: &'a str,
    dataset_b: &'a str,
    metric: &'a str,
    status: &'a str,
    pairs: usize,
    mean: Option<f64>,
    variance: Option<f64>,
}

pub fn matrix(dirs: &[PathBuf], metrics: &[Metric], out: &Path) -> Result<(), Failure> {
    let datasets = dirs
        .iter()
        .zip(dataset_names(dirs))
        .map(|(dir, name)| load_dataset(dir, name))
        .collect::<Result<Vec<_>, _>>()?;
    let mut unique: Vec<Metric> = Vec::new();
    for &m in metrics {
        if !unique.contains(&m) {
            unique.push(m);
        }
    }
    let reports: Vec<_> = unique.iter().map(|&m| comparison_matrix(&datasets, m)).collect();

    let pairs_path = with_suffix(out, "_pairs.csv");
    let cells_path = with_suffix(out, "_cells.csv");
    let mut pairs = csv::Writer::from_path(&pairs_path).map_err(|e| write_failure(&pairs_path, e))?;
    let mut cells = csv::Writer::from_path(&cells_path).map_err(|e| write_failure(&cells_path, e))?;
    for report in &reports {
        let metric = report.metric.name();
        for cell in &report.cells {
            let status = match cell.status {
                CellStatus::Ok => "ok",
                CellStatus::NotApplicable { .. } => "n/a",
            };
            cells
                .serialize(CellRow {
                    dataset_a: &cell.dataset_a,
                    dataset_b: &cell.dataset_b,
                    metric,
                    status,
                    pairs: cell.pairs.len(),
                    mean: cell.mean,
                    variance: cell.variance,
                })
                .map_err(|e| write_failure(&cells_path, e))?;
            for p in &cell.pairs {
                pairs
                    .serialize(PairRow {
                        dataset_a: &cell.dataset_a,
                        dataset_b: &cell.dataset_b,
                        file_a: &p.file_a,
                        file_b: &p.file_b,
                        metric,
                        value: p.value,
                    })
                    .map_err(|e| write_failure(&pairs_path, e))?;
            }
        }
        write_file(
            &with_suffix(out, &format!("_{metric}.svg")),
            &plot::matrix_histograms(report),
        )?;
    }
    pairs.flush().map_err(|e| write_failure(&pairs_path, e))?;
    cells.flush().map_err(|e| write_failure(&cells_path, e))?;

    let directories: Vec<String> = dirs.iter().map(|d| d.display().to_string()).collect();
    write_json(
        &with_suffix(out, ".json"),
        &json!({
            "schema_version": SCHEMA_VERSION,
            "config": { "directories": directories, "metrics": unique },
            "reports": reports,
        }),
    )?;
    let summary: Vec<_> = reports
        .iter()
        .flat_map(|r| {
            r.cells.iter().map(move |c| {
                json!({ "metric": r.metric, "dataset_a": c.dataset_a, "dataset_b": c.dataset_b, "mean": c.mean })
            })
        })
        .collect();
    println!("{}", json!(summary));
    Ok(())
}

pub fn resolution(scenario: Scenario, sizes: &[usize], count: usize, seed: u64, out: &Path) -> Result<(), Failure> {
    let smallest = *sizes
        .first()
        .ok_or_else(|| Error::InvalidConfig("at least one size is required".into()))?;
    let base = ScenarioConfig::new(scenario, smallest, seed, count);
    let report = resolution_study(&base, sizes)?;

    write_json(&with_suffix(out, ".json"), &report)?;
    let csv_path = with_suffix(out, "_pairs.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| write_failure(&csv_path, e))?;
    for p in &report.pairs {
        w.serialize(p).map_err(|e| write_failure(&csv_path, e))?;
    }
    w.flush().map_err(|e| write_failure(&csv_path, e))?;
    write_file(&with_suffix(out, "_scatter.svg"), &plot::resolution_scatter(&report))?;
    println!("{}", json!(report.deviations));
    Ok(())
}
