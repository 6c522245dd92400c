//! Static fringe plots: points with error bars and an optional fitted curve.

use std::fmt::Write;

use anyhow::{bail, Result};
use cylsim::SineFit;

/// Samples used to draw a fitted curve.
pub const CURVE_SAMPLES: usize = 256;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 4] = ["#1f4e79", "#b03a2e", "#1e8449", "#7d3c98"];

#[derive(Debug, Clone)]
pub struct SeriesPoint {
    pub x: f64,
    pub y: f64,
    pub err: f64,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<SeriesPoint>,
    pub fit: Option<SineFit>,
    /// Draw points hollow (white fill).
    pub hollow: bool,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn frame(series: &[Series]) -> Frame {
    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for s in series {
        for p in &s.points {
            x0 = x0.min(p.x);
            x1 = x1.max(p.x);
            y0 = y0.min(p.y - p.err);
            y1 = y1.max(p.y + p.err);
        }
        if let Some(fit) = &s.fit {
            for (_, y) in curve(fit, x0, x1) {
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
    }
    if x1 <= x0 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 <= y0 {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let pad = 0.05 * (y1 - y0);
    Frame {
        x0,
        x1,
        y0: y0 - pad,
        y1: y1 + pad,
    }
}

fn curve(fit: &SineFit, x0: f64, x1: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    (0..CURVE_SAMPLES).map(move |i| {
        let x = x0 + (x1 - x0) * i as f64 / (CURVE_SAMPLES - 1) as f64;
        (x, fit.eval(x))
    })
}

/// Renders the series as a standalone SVG document. Output depends only on
/// the input values.
pub fn emit_svg(title: &str, x_label: &str, series: &[Series]) -> Result<String> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        bail!("cannot plot an empty series");
    }
    let f = frame(series);
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    )?;
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
    writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    )?;
    // axes
    let (left, right) = (MARGIN, WIDTH - MARGIN);
    let (top, bottom) = (MARGIN, HEIGHT - MARGIN);
    writeln!(
        out,
        r#"<path d="M{left:.1} {top:.1} L{left:.1} {bottom:.1} L{right:.1} {bottom:.1}" stroke="black" fill="none"/>"#
    )?;
    for (x, anchor) in [(f.x0, "start"), (f.x1, "end")] {
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{x:.3}</text>"#,
            f.px(x),
            bottom + 16.0
        )?;
    }
    for y in [f.y0, f.y1] {
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{y:.3}</text>"#,
            left - 4.0,
            f.py(y) + 4.0
        )?;
    }
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    )?;

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        writeln!(out, r#"<g id="series-{i}">"#)?;
        if let Some(fit) = &s.fit {
            let pts: Vec<String> = curve(fit, f.x0, f.x1)
                .map(|(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
                .collect();
            writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-dasharray="4 3"/>"#,
                pts.join(" ")
            )?;
        }
        for p in &s.points {
            if p.err > 0.0 {
                writeln!(
                    out,
                    r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/>"#,
                    f.py(p.y - p.err),
                    f.py(p.y + p.err),
                    x = f.px(p.x)
                )?;
            }
        }
        let fill = if s.hollow { "white" } else { color };
        for p in &s.points {
            writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{fill}" stroke="{color}"/>"#,
                f.px(p.x),
                f.py(p.y)
            )?;
        }
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12" fill="{color}">{}</text>"#,
            right - 150.0,
            top + 16.0 * (i + 1) as f64,
            escape(&s.label)
        )?;
        writeln!(out, "</g>")?;
    }
    writeln!(out, "</svg>")?;
    Ok(out)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
