use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pointssim::{Metric, Scenario};

mod commands;
mod plot;

use commands::Failure;

/// Rotation and resolution invariant comparison of binary images.
#[derive(Parser)]
#[command(name = "pointssim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare two images with one metric and print the score as JSON.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// pointssim, mse, ssim or msssim
        #[arg(long, default_value = "pointssim")]
        metric: Metric,
    },
    /// Print the summary vector of one or more images.
    Measures {
        #[arg(required = true)]
        images: Vec<PathBuf>,
        /// Quadrats per axis for the irregularity measure.
        #[arg(long, default_value_t = pointssim::measures::DEFAULT_DIVISIONS)]
        quadrats: usize,
        /// Width of the base frame; defaults to one unit per pixel.
        #[arg(long)]
        frame_extent: Option<f64>,
        /// Output format; JSON for a single image and CSV otherwise unless
        /// given.
        #[arg(long, value_parser = ["json", "csv"])]
        format: Option<String>,
    },
    /// Export the anchor points of an image as CSV (x,y,radius,label).
    Anchors {
        image: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        frame_extent: Option<f64>,
    },
    /// Generate a batch of synthetic images plus a manifest.
    Generate(Box<GenerateArgs>),
    /// Pairwise comparison matrix between image directories.
    Matrix {
        /// Directory of images forming one dataset; repeat for more.
        #[arg(long = "dir", required = true)]
        dirs: Vec<PathBuf>,
        /// Metric to evaluate; repeat for more.
        #[arg(long = "metric", default_values = ["pointssim"])]
        metrics: Vec<Metric>,
        /// Output path prefix.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare summary vectors of the same scenes rendered at several sizes.
    Resolution {
        #[arg(long, default_value = "corner_mixture")]
        scenario: Scenario,
        /// Strictly increasing sizes, each a multiple of the first.
        #[arg(long, value_delimiter = ',', default_values = ["128", "256", "512"])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path prefix.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct GenerateArgs {
    /// Scenario name; may be omitted when --config is given.
    #[arg(required_unless_present = "config")]
    scenario: Option<Scenario>,
    #[arg(long, default_value_t = 256)]
    size: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Scenario configuration JSON, e.g. a manifest written earlier. Other
    /// flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    grid_rows: Option<usize>,
    #[arg(long)]
    grid_cols: Option<usize>,
    #[arg(long)]
    objects: Option<usize>,
    #[arg(long)]
    semi_major: Option<f64>,
    #[arg(long)]
    semi_minor: Option<f64>,
    #[arg(long)]
    size_jitter: Option<f64>,
    #[arg(long)]
    noise_amplitude: Option<f64>,
    #[arg(long)]
    corner_margin: Option<f64>,
    #[arg(long)]
    circle_fraction: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long)]
    point_radius: Option<f64>,
    #[arg(long)]
    smoothing_radius: Option<usize>,
    #[arg(long)]
    foreground_proportion: Option<f64>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compare { a, b, metric } => commands::compare(&a, &b, metric),
        Command::Measures {
            images,
            quadrats,
            frame_extent,
            format,
        } => {
            let json = format.map_or(images.len() == 1, |f| f == "json");
            commands::measures(&images, quadrats, frame_extent, json)
        }
        Command::Anchors {
            image,
            out,
            frame_extent,
        } => commands::anchors(&image, out.as_deref(), frame_extent),
        Command::Generate(args) => commands::generate(&args.to_config()?, &args.out),
        Command::Matrix { dirs, metrics, out } => commands::matrix(&dirs, &metrics, &out),
        Command::Resolution {
            scenario,
            sizes,
            count,
            seed,
            out,
        } => commands::resolution(scenario, &sizes, count, seed, &out),
    }
}

impl GenerateArgs {
    fn to_config(&self) -> Result<pointssim::ScenarioConfig, Failure> {
        if let Some(path) = &self.config {
            return commands::read_config(path);
        }
        let scenario = self.scenario.expect("clap enforces scenario or --config");
        let mut cfg = pointssim::ScenarioConfig::new(scenario, self.size, self.seed, self.count);
        let p = &mut cfg.params;
        macro_rules! apply {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { p.$field = v; })*
            };
        }
        apply!(
            grid_rows,
            grid_cols,
            objects,
            semi_major,
            semi_minor,
            size_jitter,
            noise_amplitude,
            corner_margin,
            circle_fraction,
            points,
            point_radius,
            smoothing_radius,
            foreground_proportion
        );
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            println!("{}", failure.to_json());
            ExitCode::from(failure.exit_code())
        }
    }
}
