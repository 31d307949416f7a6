//! Minimal SVG output: histogram grids for comparison matrices and
//! low-vs-high scatter panels for the resolution study.

use std::fmt::Write;

use pointssim::experiments::{CellStatus, ComparisonMatrixReport, ResolutionReport, MEASURE_NAMES};

const PANEL: f64 = 220.0;
const MARGIN: f64 = 36.0;
const BINS: usize = 20;

struct Svg {
    body: String,
    width: f64,
    height: f64,
}

impl Svg {
    fn new(width: f64, height: f64) -> Self {
        Self {
            body: String::new(),
            width,
            height,
        }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, style: &str) {
        let _ = writeln!(
            self.body,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{w:.2}" height="{h:.2}" {style}/>"#
        );
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, style: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {style}/>"#
        );
    }

    fn circle(&mut self, cx: f64, cy: f64, r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{r}" fill="{fill}" fill-opacity="0.7"/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, size: u32, anchor: &str, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" font-size="{size}" text-anchor="{anchor}" font-family="sans-serif">{}</text>"#,
            escape(content)
        );
    }

    fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-3) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Bin range shared by all panels of a report, padded when degenerate.
fn value_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// One histogram panel per matrix cell, laid out as the upper triangle of a
/// dataset-by-dataset grid.
pub fn matrix_histograms(report: &ComparisonMatrixReport) -> String {
    let n = report.dataset_names.len();
    let side = MARGIN + n as f64 * (PANEL + MARGIN);
    let mut svg = Svg::new(side, side + MARGIN);
    svg.text(
        side / 2.0,
        22.0,
        16,
        "middle",
        &format!("{} pairwise scores", report.metric),
    );
    let (lo, hi) = value_range(report.cells.iter().flat_map(|c| c.values()));
    let index = |name: &str| report.dataset_names.iter().position(|d| d == name).unwrap_or(0);

    for cell in &report.cells {
        let (row, col) = (index(&cell.dataset_a), index(&cell.dataset_b));
        let x0 = MARGIN + col as f64 * (PANEL + MARGIN);
        let y0 = 2.0 * MARGIN + row as f64 * (PANEL + MARGIN);
        svg.rect(x0, y0, PANEL, PANEL, r##"fill="none" stroke="#888""##);
        svg.text(
            x0 + PANEL / 2.0,
            y0 - 6.0,
            11,
            "middle",
            &format!("{} vs {}", cell.dataset_a, cell.dataset_b),
        );
        if let CellStatus::NotApplicable { .. } = cell.status {
            svg.text(x0 + PANEL / 2.0, y0 + PANEL / 2.0, 18, "middle", "n/a");
            continue;
        }
        let mut counts = [0usize; BINS];
        for v in cell.values() {
            let b = ((v - lo) / (hi - lo) * BINS as f64).floor() as usize;
            counts[b.min(BINS - 1)] += 1;
        }
        let peak = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
        let plot_h = PANEL - 40.0;
        let bar_w = PANEL / BINS as f64;
        for (b, &count) in counts.iter().enumerate() {
            let h = count as f64 / peak * plot_h;
            svg.rect(
                x0 + b as f64 * bar_w,
                y0 + PANEL - 20.0 - h,
                bar_w - 1.0,
                h,
                r##"fill="#4c72b0""##,
            );
        }
        svg.text(x0 + 2.0, y0 + PANEL - 6.0, 9, "start", &fmt_tick(lo));
        svg.text(x0 + PANEL - 2.0, y0 + PANEL - 6.0, 9, "end", &fmt_tick(hi));
        svg.text(
            x0 + 4.0,
            y0 + 12.0,
            9,
            "start",
            &format!(
                "n={} mean={} var={}",
                cell.pairs.len(),
                fmt_tick(cell.mean.unwrap_or(f64::NAN)),
                fmt_tick(cell.variance.unwrap_or(f64::NAN))
            ),
        );
    }
    svg.finish()
}

/// Per-measure scatter of the smallest against the largest size, with the
/// identity line. Realizations whose objects merged at the low size are
/// drawn in orange.
pub fn resolution_scatter(report: &ResolutionReport) -> String {
    let (lo_size, hi_size) = (report.sizes[0], *report.sizes.last().unwrap_or(&report.sizes[0]));
    let width = MARGIN + MEASURE_NAMES.len() as f64 * (PANEL + MARGIN);
    let mut svg = Svg::new(width, PANEL + 3.0 * MARGIN);
    svg.text(
        width / 2.0,
        20.0,
        14,
        "middle",
        &format!("{lo_size} px (horizontal) vs {hi_size} px (vertical)"),
    );
    for (m, measure) in MEASURE_NAMES.iter().enumerate() {
        let rows: Vec<_> = report
            .pairs
            .iter()
            .filter(|p| p.measure == *measure && p.size_low == lo_size && p.size_high == hi_size)
            .collect();
        let (_, max) = value_range(rows.iter().flat_map(|p| [p.low, p.high]).chain([0.0]));
        let max = max * 1.05;
        let x0 = MARGIN + m as f64 * (PANEL + MARGIN);
        let y0 = 2.0 * MARGIN;
        let px = |v: f64| x0 + v / max * PANEL;
        let py = |v: f64| y0 + PANEL - v / max * PANEL;
        svg.rect(x0, y0, PANEL, PANEL, r##"fill="none" stroke="#888""##);
        svg.line(
            px(0.0),
            py(0.0),
            px(max),
            py(max),
            r##"stroke="#c44" stroke-dasharray="4 3""##,
        );
        for p in &rows {
            let fill = if p.objects_merged { "#dd8452" } else { "#4c72b0" };
            svg.circle(px(p.low), py(p.high), 2.5, fill);
        }
        svg.text(x0 + PANEL / 2.0, y0 - 6.0, 12, "middle", measure);
        svg.text(x0, y0 + PANEL + 14.0, 9, "start", "0");
        svg.text(x0 + PANEL, y0 + PANEL + 14.0, 9, "end", &fmt_tick(max));
    }
    svg.finish()
}
