//! Output files: per-run CSVs, JSON summaries and SVG plots.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::compare::{Comparison, ComparisonReport, SweepGrid};
use super::sim::{RunAudit, RunResult};
use crate::error::{Error, Result};
use crate::metrics::{aggregate_runs, half_day_window, running_mean, write_metrics_csv, MetricsRecord, RunSummary};

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];
const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 60.0;

/// A named polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn bounds(series: &[Series]) -> (f64, f64, f64, f64) {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return (0.0, 1.0, 0.0, 1.0);
    }
    y0 = y0.min(0.0);
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    (x0, x1, y0, y1)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line chart with axes, min/max tick labels and a legend.
pub fn line_chart_svg(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (x0, x1, y0, y1) = bounds(series);
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(s, r#"<path d="M{left},{top} L{left},{bottom} L{right},{bottom}" stroke="black" fill="none"/>"#);
    let _ = writeln!(s, r#"<text x="{left}" y="{}" text-anchor="middle">{x0:.4}</text>"#, bottom + 16.0);
    let _ = writeln!(s, r#"<text x="{right}" y="{}" text-anchor="middle">{x1:.4}</text>"#, bottom + 16.0);
    let _ = writeln!(s, r#"<text x="{}" y="{bottom}" text-anchor="end">{y0:.4}</text>"#, left - 4.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{y1:.4}</text>"#, left - 4.0, top + 4.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 16.0, escape(x_label));
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (j, &(x, y)) in ser.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()).enumerate() {
            let _ = write!(d, "{}{:.2},{:.2} ", if j == 0 { "M" } else { "L" }, px(x), py(y));
        }
        let _ = writeln!(s, r#"<path d="{}" stroke="{color}" stroke-width="1.5" fill="none"/>"#, d.trim_end());
        let ly = top + 14.0 * i as f64;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/>"#, right + 4.0, ly - 9.0);
        let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, right + 16.0, escape(&ser.label));
    }
    s.push_str("</svg>\n");
    s
}

/// Heat map of `values[row][col]`, darker meaning lower.
pub fn heatmap_svg(title: &str, row_labels: &[String], col_labels: &[String], values: &[Vec<f64>]) -> String {
    let finite = values.iter().flatten().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cell_w = (WIDTH - 2.0 * MARGIN) / col_labels.len().max(1) as f64;
    let cell_h = (HEIGHT - 2.0 * MARGIN) / row_labels.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(title));
    for (r, row) in values.iter().enumerate() {
        let y = MARGIN + r as f64 * cell_h;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            MARGIN - 4.0,
            y + cell_h / 2.0 + 4.0,
            escape(&row_labels[r])
        );
        for (c, v) in row.iter().enumerate() {
            let x = MARGIN + c as f64 * cell_w;
            let shade = if v.is_finite() { (55.0 + 200.0 * (v - lo) / span) as u8 } else { 255 };
            let _ = writeln!(
                s,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{cell_w:.1}" height="{cell_h:.1}" fill="rgb({shade},{shade},255)" stroke="white"/>"#
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{:.2}</text>"#,
                x + cell_w / 2.0,
                y + cell_h / 2.0 + 4.0,
                v * 1e3
            );
        }
    }
    for (c, label) in col_labels.iter().enumerate() {
        let x = MARGIN + (c as f64 + 0.5) * cell_w;
        let _ = writeln!(s, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#, HEIGHT - MARGIN + 16.0, escape(label));
    }
    s.push_str("</svg>\n");
    s
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn metrics_csv_path(dir: &Path, label: &str, seed: u64) -> PathBuf {
    dir.join(format!("metrics_{label}_seed{seed}.csv"))
}

#[derive(Serialize)]
struct RunEntry<'a> {
    #[serde(flatten)]
    summary: RunSummary,
    audit: &'a RunAudit,
}

/// Smoothed, seed-averaged series per label.
fn smoothed(runs: &[&RunResult], label: &str, slot_duration_s: f64, f: fn(&MetricsRecord) -> f64) -> Option<Series> {
    let series: Vec<Vec<f64>> = runs.iter().filter(|r| r.label == label).map(|r| r.records.iter().map(f).collect()).collect();
    let (mean, _) = aggregate_runs(&series).ok()?;
    if mean.is_empty() {
        return None;
    }
    // Half a day, but never more than a quarter of the run so short runs still plot.
    let window = half_day_window(slot_duration_s).min((mean.len() / 4).max(1));
    let day = 86_400.0 / slot_duration_s;
    let points = running_mean(&mean, window).into_iter().map(|(i, v)| (i as f64 / day, v)).collect();
    Some(Series { label: label.to_string(), points })
}

fn write_plots(dir: &Path, runs: &[&RunResult], slot_duration_s: f64) -> Result<()> {
    let mut labels: Vec<&str> = Vec::new();
    for r in runs {
        if !labels.contains(&r.label.as_str()) {
            labels.push(&r.label);
        }
    }
    let plots: [(&str, &str, &str, fn(&MetricsRecord) -> f64); 4] = [
        ("cost.svg", "Network cost", "cost (ms)", |r| r.cost_s * 1e3),
        ("drop_rate.svg", "Drop rate", "drop rate", |r| r.drop_rate),
        ("throughput.svg", "Throughput", "throughput (Mbit/s)", |r| r.throughput_bps / 1e6),
        ("hops.svg", "Average hops", "hops", |r| r.avg_hops),
    ];
    for (file, title, y_label, f) in plots {
        let series: Vec<Series> = labels.iter().filter_map(|l| smoothed(runs, l, slot_duration_s, f)).collect();
        write_file(&dir.join(file), line_chart_svg(title, "time (days)", y_label, &series))?;
    }
    Ok(())
}

/// Per-run metrics CSVs, `summary.json` and plots.
pub fn write_runs(dir: &Path, runs: &[&RunResult], start_utc_s: f64, slot_duration_s: f64) -> Result<()> {
    create_dir(dir)?;
    let mut entries = Vec::with_capacity(runs.len());
    for r in runs {
        let path = metrics_csv_path(dir, &r.label, r.seed);
        let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
        write_metrics_csv(std::io::BufWriter::new(file), &r.label, r.seed, start_utc_s, slot_duration_s, &r.records)?;
        entries.push(RunEntry { summary: r.summary(slot_duration_s), audit: &r.audit });
    }
    write_file(&dir.join("summary.json"), serde_json::to_string_pretty(&entries)?)?;
    write_plots(dir, runs, slot_duration_s)
}

/// Everything from [`write_runs`] plus `comparison.json`.
pub fn write_comparison(dir: &Path, cmp: &Comparison, report: &ComparisonReport, start_utc_s: f64) -> Result<()> {
    let runs: Vec<&RunResult> = cmp.runs.iter().flatten().collect();
    write_runs(dir, &runs, start_utc_s, cmp.slot_duration_s)?;
    write_file(&dir.join("comparison.json"), serde_json::to_string_pretty(report)?)
}

/// `sweep.csv`, `sweep.json` and `sweep.svg`.
pub fn write_sweep(dir: &Path, grid: &SweepGrid) -> Result<()> {
    create_dir(dir)?;
    write_file(&dir.join("sweep.csv"), grid.to_csv()?)?;
    write_file(&dir.join("sweep.json"), serde_json::to_string_pretty(grid)?)?;
    let rows: Vec<String> = grid.widths_m.iter().map(|w| format!("{} km", w / 1e3)).collect();
    let cols: Vec<String> = grid.partitions.iter().map(|p| format!("|G|={p}")).collect();
    write_file(&dir.join("sweep.svg"), heatmap_svg("Mean cost (ms) by tile width and partitions", &rows, &cols, &grid.mean_cost_s))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_well_formed_enough() {
        let s = line_chart_svg(
            "t<1>",
            "x",
            "y",
            &[Series { label: "a&b".into(), points: vec![(0.0, 1.0), (1.0, 2.0), (2.0, f64::NAN)] }],
        );
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("t&lt;1&gt;") && s.contains("a&amp;b"));
        assert!(!s.contains("NaN"));
        let h = heatmap_svg("h", &["r".into()], &["c1".into(), "c2".into()], &[vec![0.01, 0.02]]);
        assert_eq!(h.matches("<rect x=").count(), 2);
    }

    #[test]
    fn empty_chart_does_not_panic() {
        assert!(line_chart_svg("e", "x", "y", &[]).contains("</svg>"));
    }
}
