//! Static SVG charts of traces and cohort stacks.
//!
//! Output is a pure function of the input: no timestamps, ids or randomness,
//! and every coordinate is printed with three decimals, so identical inputs
//! give byte-identical files.
//!
//! Colours: band fills are red `#d62728` (lowest), green `#2ca02c` (highest)
//! and yellow `#ffbf00` (steepest change). Stacked subjects cycle through
//! [`PALETTE`]; the cohort top line is drawn in black.

use std::fmt::Write as _;

use chrono::{DateTime, Utc};

use crate::cohort::{AnnotationBands, Band, CohortStack};
use crate::intensity::IntensityTrace;
use crate::io::format_instant;
use crate::timeseries::DAY;

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 360.0;
const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 16.0;
const MARGIN_BOTTOM: f64 = 40.0;

pub const PALETTE: [&str; 12] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
    "#aec7e8", "#ffbb78",
];

pub const BAND_COLORS: [(&str, &str); 3] = [("red", "#d62728"), ("green", "#2ca02c"), ("yellow", "#ffbf00")];

/// Maps instants onto the horizontal pixel range. Each sample owns one stride
/// cell, so the domain runs from the first centre to one stride past the last.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XScale {
    pub start: f64,
    pub end: f64,
}

impl XScale {
    pub fn for_grid(grid: &[f64], stride: f64) -> Self {
        let start = grid.first().copied().unwrap_or(0.0);
        let end = grid.last().copied().unwrap_or(start) + stride;
        Self { start, end }
    }

    pub fn map(&self, t: f64) -> f64 {
        MARGIN_LEFT + (t - self.start) / (self.end - self.start) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }
}

#[derive(Debug, Clone, Copy)]
struct YScale {
    max: f64,
}

impl YScale {
    fn map(&self, v: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - v / self.max * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
}

fn axes(out: &mut String, x: &XScale, y: &YScale) {
    let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
    let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
    let _ = writeln!(
        out,
        r#"<path d="M{left:.3},{top:.3}V{bottom:.3}H{right:.3}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let v = y.max * k as f64 / 4.0;
        let py = y.map(v);
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#,
            left - 6.0,
            py + 4.0,
            trim_number(v)
        );
    }
    let span_days = (x.end - x.start) / DAY;
    let step = (span_days / 8.0).ceil().max(1.0) * DAY;
    let mut tick = (x.start / DAY).ceil() * DAY;
    while tick <= x.end {
        let px = x.map(tick);
        let label = DateTime::<Utc>::from_timestamp(tick as i64, 0)
            .map(|d| d.format("%Y-%m-%d").to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            r#"<path d="M{px:.3},{bottom:.3}v5" stroke="black"/><text x="{px:.3}" y="{:.3}" text-anchor="middle">{label}</text>"#,
            bottom + 18.0
        );
        tick += step;
    }
}

fn trim_number(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn polyline(points: impl Iterator<Item = (f64, f64)>) -> String {
    let mut d = String::new();
    for (i, (px, py)) in points.enumerate() {
        let _ = write!(d, "{}{px:.3},{py:.3}", if i == 0 { "M" } else { "L" });
    }
    d
}

/// Rectangle for one annotation band; its x extent is exactly the mapped
/// band interval.
pub fn band_rect(x: &XScale, band: &Band, label: &str, color: &str) -> String {
    let x0 = x.map(band.start);
    let x1 = x.map(band.end);
    format!(
        r#"<rect class="band {label}" data-start="{}" data-end="{}" x="{x0:.3}" y="{MARGIN_TOP:.3}" width="{:.3}" height="{:.3}" fill="{color}" fill-opacity="0.25"/>"#,
        format_instant(band.start),
        format_instant(band.end),
        x1 - x0,
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    )
}

/// One trace as a line, with optional red/green/yellow band rectangles.
pub fn render_line(trace: &IntensityTrace, bands: Option<&AnnotationBands>) -> String {
    let x = XScale::for_grid(&trace.centers, trace.spec.stride);
    let peak = trace.intensities.iter().copied().fold(0.0, f64::max);
    let y = YScale {
        max: if peak > 1.0 { peak } else { 1.0 },
    };
    let mut out = String::new();
    header(&mut out);
    if let Some(b) = bands {
        for ((label, color), band) in BAND_COLORS.iter().zip([b.lowest, b.highest, b.steepest]) {
            out.push_str(&band_rect(&x, &band, label, color));
            out.push('\n');
        }
    }
    axes(&mut out, &x, &y);
    let d = polyline(
        trace
            .centers
            .iter()
            .zip(&trace.intensities)
            .map(|(&t, &v)| (x.map(t), y.map(v))),
    );
    let _ = writeln!(
        out,
        r##"<path class="trace" d="{d}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##
    );
    out.push_str("</svg>\n");
    out
}

/// Cumulative areas, one per subject, with the cohort top line on top.
pub fn render_stacked(cohort: &CohortStack) -> String {
    let x = XScale::for_grid(&cohort.grid, cohort.stride);
    let peak = cohort.top_line.iter().copied().fold(0.0, f64::max);
    let y = YScale {
        max: if peak > 1.0 { peak } else { 1.0 },
    };
    let mut out = String::new();
    header(&mut out);
    axes(&mut out, &x, &y);
    let zeros = vec![0.0; cohort.grid.len()];
    for (i, upper) in cohort.cumulative.iter().enumerate() {
        let lower = if i == 0 { &zeros } else { &cohort.cumulative[i - 1] };
        let forward = cohort.grid.iter().zip(upper).map(|(&t, &v)| (x.map(t), y.map(v)));
        let mut d = polyline(forward);
        for (&t, &v) in cohort.grid.iter().zip(lower).rev() {
            let _ = write!(d, "L{:.3},{:.3}", x.map(t), y.map(v));
        }
        d.push('Z');
        let _ = writeln!(
            out,
            r#"<path class="subject" data-subject="{}" d="{d}" fill="{}" fill-opacity="0.8" stroke="none"/>"#,
            xml_escape(&cohort.subjects[i]),
            PALETTE[i % PALETTE.len()]
        );
    }
    let d = polyline(
        cohort
            .grid
            .iter()
            .zip(&cohort.top_line)
            .map(|(&t, &v)| (x.map(t), y.map(v))),
    );
    let _ = writeln!(
        out,
        r#"<path class="top-line" d="{d}" fill="none" stroke="black" stroke-width="2"/>"#
    );
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
