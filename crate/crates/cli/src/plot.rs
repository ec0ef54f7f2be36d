//! Plot-ready output: a gnuplot multi-column data file (missing cells are
//! `NA`) and a small log-log SVG chart with fitted-slope annotations.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qtn_core::series::fmt_f64;
use qtn_core::transforms::FitResult;

use crate::error::CliError;

pub const MISSING: &str = "NA";

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: Option<FitResult>,
}

impl PlotSeries {
    pub fn new(name: impl Into<String>, times: Vec<f64>, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            times,
            values,
            fit: None,
        }
    }

    pub fn with_fit(mut self, fit: FitResult) -> Self {
        self.fit = Some(fit);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotFiles {
    pub dat: PathBuf,
    pub svg: PathBuf,
}

/// Slope label as printed in the chart.
pub fn slope_label(fit: &FitResult) -> String {
    format!("slope = {:.4}", fit.exponent)
}

pub fn dat_text(series: &[PlotSeries]) -> String {
    let mut out = String::from("#");
    for s in series {
        let _ = write!(out, " t_{0} {0}", s.name);
    }
    out.push('\n');
    let rows = series.iter().map(|s| s.times.len()).max().unwrap_or(0);
    for i in 0..rows {
        let cells: Vec<String> = series
            .iter()
            .flat_map(|s| match (s.times.get(i), s.values.get(i)) {
                (Some(t), Some(v)) => [fmt_f64(*t), fmt_f64(*v)],
                _ => [MISSING.to_string(), MISSING.to_string()],
            })
            .collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub fn svg_text(series: &[PlotSeries]) -> String {
    let points: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|s| {
            s.times
                .iter()
                .zip(&s.values)
                .filter(|(t, v)| **t > 0.0 && **v > 0.0 && v.is_finite())
                .map(|(t, v)| (t.log10(), v.log10()))
                .collect()
        })
        .collect();
    let all = points.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in all {
        x0 = x0.min(*x);
        x1 = x1.max(*x);
        y0 = y0.min(*y);
        y1 = y1.max(*y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let (x0, x1) = (x0.floor(), x1.ceil().max(x0.floor() + 1.0));
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    for e in (x0 as i64)..=(x1 as i64) {
        let x = px(e as f64);
        let _ = writeln!(
            out,
            "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">1e{e}</text>",
            HEIGHT - MARGIN + 16.0
        );
    }
    for e in (y0 as i64)..=(y1 as i64) {
        let y = py(e as f64);
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{y:.1}\" font-size=\"11\" text-anchor=\"end\">1e{e}</text>",
            MARGIN - 6.0
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">t</text>",
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    for (i, (s, pts)) in series.iter().zip(&points).enumerate() {
        let color = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y))).collect();
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            path.join(" ")
        );
        let label = match &s.fit {
            Some(f) => format!("{}: {}", s.name, slope_label(f)),
            None => s.name.clone(),
        };
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"{color}\">{}</text>",
            MARGIN + 10.0,
            MARGIN + 18.0 + 16.0 * i as f64,
            escape(&label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `<stem>.dat` and `<stem>.svg` into `dir`.
pub fn emit_plot_data(series: &[PlotSeries], dir: &Path, stem: &str) -> Result<PlotFiles, CliError> {
    if series.is_empty() {
        return Err(CliError::Numeric(qtn_core::Error::Input("nothing to plot".into())));
    }
    if let Some(s) = series.iter().find(|s| s.times.len() != s.values.len()) {
        return Err(CliError::Numeric(qtn_core::Error::Input(format!(
            "series {} has mismatched columns",
            s.name
        ))));
    }
    let files = PlotFiles {
        dat: dir.join(format!("{stem}.dat")),
        svg: dir.join(format!("{stem}.svg")),
    };
    for (path, text) in [(&files.dat, dat_text(series)), (&files.svg, svg_text(series))] {
        std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorter_series_are_padded() {
        let a = PlotSeries::new("a", vec![1.0, 2.0, 3.0], vec![1.0, 4.0, 9.0]);
        let b = PlotSeries::new("b", vec![1.0], vec![2.0]);
        let text = dat_text(&[a, b]);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# t_a a t_b b");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].ends_with("NA NA"));
        assert_eq!(lines[3].split(' ').count(), 4);
    }

    #[test]
    fn empty_input_is_rejected() {
        let dir = std::env::temp_dir();
        assert!(emit_plot_data(&[], &dir, "x").is_err());
    }
}
