//! Minimal SVG 1.1 line charts. Output is a pure function of the input:
//! coordinates are printed with fixed precision and series keep their order.

use std::fmt::Write;

use crate::{Error, Result};

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 50.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), points }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub y_scale: Scale,
    pub width: f64,
    pub height: f64,
}

impl Default for Axes {
    fn default() -> Self {
        Axes {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            y_scale: Scale::Linear,
            width: 640.0,
            height: 400.0,
        }
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

fn span(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        // Flat data: centre it in a unit band.
        (lo - 0.5, hi + 0.5)
    }
}

/// Renders `series` as polylines with a legend. On a log axis, values `≤ 0`
/// are drawn at a tenth of the smallest positive value and a comment in the
/// output says how many were floored.
pub fn emit_svg_lines(series: &[Series], axes: &Axes) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Argument("emit_svg_lines needs at least one series".into()));
    }
    let all = || series.iter().flat_map(|s| s.points.iter());
    if all().next().is_none() {
        return Err(Error::Argument("every series is empty".into()));
    }
    if all().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Argument("series contain non-finite values".into()));
    }

    let mut floored = 0usize;
    let floor = match axes.y_scale {
        Scale::Linear => None,
        Scale::Log => {
            let min_pos = all().map(|p| p.1).filter(|&y| y > 0.0).fold(f64::INFINITY, f64::min);
            if !min_pos.is_finite() {
                return Err(Error::Argument("log axis needs at least one positive value".into()));
            }
            Some(min_pos / 10.0)
        }
    };
    let y_of = |y: f64| match floor {
        None => y,
        Some(f) => y.max(f).log10(),
    };
    if let Some(f) = floor {
        floored = all().filter(|p| p.1 < f).count();
    }

    let (x_lo, x_hi) = span(
        all().map(|p| p.0).fold(f64::INFINITY, f64::min),
        all().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    );
    let (y_lo, y_hi) = span(
        all().map(|p| y_of(p.1)).fold(f64::INFINITY, f64::min),
        all().map(|p| y_of(p.1)).fold(f64::NEG_INFINITY, f64::max),
    );
    let plot_w = axes.width - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = axes.height - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let py = |y: f64| MARGIN_TOP + (1.0 - (y_of(y) - y_lo) / (y_hi - y_lo)) * plot_h;

    let mut out = String::new();
    // Writing to a String cannot fail.
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = axes.width,
        h = axes.height
    );
    if floored > 0 {
        let _ = writeln!(
            out,
            "<!-- warning: {floored} non-positive value(s) floored at {:e} on the log axis -->",
            floor.unwrap_or_default()
        );
    }
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w:.2}" height="{plot_h:.2}" fill="none" stroke="black"/>"#
    );
    let font = r#"font-family="sans-serif" font-size="12""#;
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="18" text-anchor="middle" {font}>{}</text>"#,
        axes.width / 2.0,
        escape(&axes.title)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" {font}>{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        axes.height - 10.0,
        escape(&axes.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})" {font}>{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(&axes.y_label)
    );
    // Axis extremes as tick labels; log axes print the underlying value.
    let y_tick = |v: f64| match axes.y_scale {
        Scale::Linear => format!("{v:.3e}"),
        Scale::Log => format!("{:.3e}", 10f64.powf(v)),
    };
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end" {font}>{}</text>"#,
        MARGIN_LEFT - 4.0,
        MARGIN_TOP + 4.0,
        y_tick(y_hi)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end" {font}>{}</text>"#,
        MARGIN_LEFT - 4.0,
        MARGIN_TOP + plot_h,
        y_tick(y_lo)
    );
    let _ = writeln!(
        out,
        r#"<text x="{MARGIN_LEFT}" y="{:.2}" text-anchor="start" {font}>{x_lo}</text>"#,
        MARGIN_TOP + plot_h + 16.0
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="end" {font}>{x_hi}</text>"#,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h + 16.0
    );

    for (i, s) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let ly = MARGIN_TOP + 14.0 + 16.0 * i as f64;
        let lx = MARGIN_LEFT + plot_w - 150.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{colour}" stroke-width="2"/>"#,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{ly:.2}" {font}>{}</text>"#, lx + 26.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
