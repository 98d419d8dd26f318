//! Log-log scaling plots as self-contained SVG documents.
//!
//! One series per problem (median evaluations against problem size, with
//! an interquartile band implied by whisker lines), plus an optional
//! dashed overlay of a fitted `a·nλln λ + b·n²` model evaluated at the
//! measured cells.

use std::fmt;
use std::fmt::Write as _;

use pbil_core::Problem;

use crate::fit::ScalingFit;
use crate::stats::CellSummary;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 32.0;
const MARGIN_BOTTOM: f64 = 56.0;
const SERIES_COLORS: [&str; 2] = ["#1f77b4", "#d62728"];

/// Renders the summaries as an SVG string. Errors when no cell has a
/// positive size and runtime (log axes cannot place such points).
pub fn render_scaling_plot(
    summaries: &[CellSummary],
    fit: Option<&ScalingFit>,
) -> Result<String, PlotError> {
    let usable: Vec<&CellSummary> = summaries
        .iter()
        .filter(|cell| cell.n > 0 && cell.median_evaluations > 0.0)
        .collect();
    if usable.is_empty() {
        return Err(PlotError::NoData);
    }

    // Series keyed by problem, in first-appearance order.
    let mut problems: Vec<Problem> = Vec::new();
    for cell in &usable {
        if !problems.contains(&cell.problem) {
            problems.push(cell.problem);
        }
    }

    let mut x_values: Vec<f64> = usable.iter().map(|cell| cell.n as f64).collect();
    let mut y_values: Vec<f64> = usable.iter().map(|cell| cell.median_evaluations).collect();
    y_values.extend(
        usable
            .iter()
            .flat_map(|cell| [cell.q25_evaluations, cell.q75_evaluations])
            .filter(|&v| v > 0.0),
    );
    if let Some(fit) = fit {
        y_values.extend(
            usable
                .iter()
                .map(|cell| fit.predict(cell.n as f64, cell.lambda as f64))
                .filter(|&v| v > 0.0),
        );
    }
    x_values.sort_by(f64::total_cmp);
    y_values.sort_by(f64::total_cmp);

    let x_axis = LogAxis::covering(x_values[0], x_values[x_values.len() - 1]);
    let y_axis = LogAxis::covering(y_values[0], y_values[y_values.len() - 1]);
    let plot_width = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_height = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let map_x = |value: f64| MARGIN_LEFT + x_axis.fraction(value) * plot_width;
    let map_y = |value: f64| MARGIN_TOP + (1.0 - y_axis.fraction(value)) * plot_height;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        svg,
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );

    // Grid and tick labels at powers of ten.
    for exponent in x_axis.decade_exponents() {
        let value = 10f64.powi(exponent);
        let x = map_x(value);
        let _ = writeln!(
            svg,
            "  <line x1=\"{x:.1}\" y1=\"{MARGIN_TOP}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"#dddddd\"/>",
            MARGIN_TOP + plot_height
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{x:.1}\" y=\"{:.1}\" text-anchor=\"middle\">1e{exponent}</text>",
            MARGIN_TOP + plot_height + 18.0
        );
    }
    for exponent in y_axis.decade_exponents() {
        let value = 10f64.powi(exponent);
        let y = map_y(value);
        let _ = writeln!(
            svg,
            "  <line x1=\"{MARGIN_LEFT}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"#dddddd\"/>",
            MARGIN_LEFT + plot_width
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">1e{exponent}</text>",
            MARGIN_LEFT - 8.0,
            y + 4.0
        );
    }

    // Axis frame and labels.
    let _ = writeln!(
        svg,
        "  <rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_width:.1}\" height=\"{plot_height:.1}\" fill=\"none\" stroke=\"#333333\"/>"
    );
    let _ = writeln!(
        svg,
        "  <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">problem size n</text>",
        MARGIN_LEFT + plot_width / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        "  <text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">median evaluations</text>",
        MARGIN_TOP + plot_height / 2.0,
        MARGIN_TOP + plot_height / 2.0
    );

    for (series_index, &problem) in problems.iter().enumerate() {
        let color = SERIES_COLORS[series_index % SERIES_COLORS.len()];
        let mut cells: Vec<&&CellSummary> = usable
            .iter()
            .filter(|cell| cell.problem == problem)
            .collect();
        cells.sort_by_key(|cell| cell.n);

        let path: Vec<String> = cells
            .iter()
            .map(|cell| {
                format!(
                    "{:.1},{:.1}",
                    map_x(cell.n as f64),
                    map_y(cell.median_evaluations)
                )
            })
            .collect();
        let _ = writeln!(
            svg,
            "  <polyline class=\"series\" data-problem=\"{problem}\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            path.join(" ")
        );
        for cell in &cells {
            let x = map_x(cell.n as f64);
            let _ = writeln!(
                svg,
                "  <circle cx=\"{x:.1}\" cy=\"{:.1}\" r=\"3.5\" fill=\"{color}\"/>",
                map_y(cell.median_evaluations)
            );
            if cell.q25_evaluations > 0.0 && cell.q75_evaluations > cell.q25_evaluations {
                let _ = writeln!(
                    svg,
                    "  <line x1=\"{x:.1}\" y1=\"{:.1}\" x2=\"{x:.1}\" y2=\"{:.1}\" stroke=\"{color}\" stroke-width=\"1\"/>",
                    map_y(cell.q25_evaluations),
                    map_y(cell.q75_evaluations)
                );
            }
        }

        if let Some(fit) = fit {
            let overlay: Vec<String> = cells
                .iter()
                .filter_map(|cell| {
                    let predicted = fit.predict(cell.n as f64, cell.lambda as f64);
                    (predicted > 0.0).then(|| {
                        format!("{:.1},{:.1}", map_x(cell.n as f64), map_y(predicted))
                    })
                })
                .collect();
            if overlay.len() >= 2 {
                let _ = writeln!(
                    svg,
                    "  <polyline class=\"fit\" data-problem=\"{problem}\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>",
                    overlay.join(" ")
                );
            }
        }

        // Legend entry.
        let legend_y = MARGIN_TOP + 16.0 + 18.0 * series_index as f64;
        let _ = writeln!(
            svg,
            "  <line x1=\"{:.1}\" y1=\"{legend_y:.1}\" x2=\"{:.1}\" y2=\"{legend_y:.1}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            MARGIN_LEFT + 12.0,
            MARGIN_LEFT + 36.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"{:.1}\">{problem}</text>",
            MARGIN_LEFT + 42.0,
            legend_y + 4.0
        );
    }
    if fit.is_some() {
        let legend_y = MARGIN_TOP + 16.0 + 18.0 * problems.len() as f64;
        let _ = writeln!(
            svg,
            "  <line x1=\"{:.1}\" y1=\"{legend_y:.1}\" x2=\"{:.1}\" y2=\"{legend_y:.1}\" stroke=\"#555555\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\"/>",
            MARGIN_LEFT + 12.0,
            MARGIN_LEFT + 36.0
        );
        let _ = writeln!(
            svg,
            "  <text x=\"{:.1}\" y=\"{:.1}\">fitted model</text>",
            MARGIN_LEFT + 42.0,
            legend_y + 4.0
        );
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// A log axis padded to at least a visible span.
struct LogAxis {
    log_min: f64,
    log_max: f64,
}

impl LogAxis {
    fn covering(min: f64, max: f64) -> Self {
        let mut log_min = min.log10();
        let mut log_max = max.log10();
        if log_max - log_min < 0.1 {
            let mid = 0.5 * (log_min + log_max);
            log_min = mid - 0.05;
            log_max = mid + 0.05;
        }
        let pad = 0.04 * (log_max - log_min);
        LogAxis {
            log_min: log_min - pad,
            log_max: log_max + pad,
        }
    }

    fn fraction(&self, value: f64) -> f64 {
        (value.log10() - self.log_min) / (self.log_max - self.log_min)
    }

    fn decade_exponents(&self) -> Vec<i32> {
        let lo = self.log_min.ceil() as i32;
        let hi = self.log_max.floor() as i32;
        (lo..=hi).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlotError {
    NoData,
}

impl fmt::Display for PlotError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlotError::NoData => write!(f, "no plottable cells (need n > 0 and evaluations > 0)"),
        }
    }
}

impl std::error::Error for PlotError {}
