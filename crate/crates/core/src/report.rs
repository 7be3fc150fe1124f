//! Plain-text artifacts: curve CSV and minimal SVG line plots. Output is deterministic (no
//! timestamps) so identical runs produce identical bytes.

use std::fmt::Write;

use crate::tradeoff::TradeoffCurve;

pub const CSV_HEADER: &str = "P,rate,provenance_id";

/// `P,rate,provenance_id` with LF line endings and six decimals.
pub fn curve_csv(curve: &TradeoffCurve) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for pt in curve.points() {
        let id = if pt.provenance_id.contains([',', '"', '\n']) {
            format!("\"{}\"", pt.provenance_id.replace('"', "\"\""))
        } else {
            pt.provenance_id.clone()
        };
        writeln!(out, "{:.6},{:.6},{}", pt.p, pt.rate, id).unwrap();
    }
    out
}

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
    pub color: &'a str,
}

impl<'a> Series<'a> {
    pub fn from_curve(curve: &TradeoffCurve, label: &'a str, color: &'a str) -> Self {
        Self { label, points: curve.points().iter().map(|p| (p.p, p.rate)).collect(), color }
    }
}

pub struct Plot<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub series: Vec<Series<'a>>,
    /// Shaded `x` interval (e.g. a witness interval).
    pub shade: Option<(f64, f64)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

pub fn svg_plot(plot: &Plot) -> String {
    let all = || plot.series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = {
        let (lo, hi) =
            (all().map(|p| p.0).fold(f64::INFINITY, f64::min), all().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max));
        if lo.is_finite() && hi > lo {
            (lo, hi)
        } else {
            bounds(all().map(|p| p.0))
        }
    };
    let (y0, y1) = bounds(all().map(|p| p.1));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (1.0 - (y - y0) / (y1 - y0)) * ph;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    if let Some((a, b)) = plot.shade {
        writeln!(
            s,
            r##"<rect x="{:.2}" y="{TOP:.2}" width="{:.2}" height="{ph:.2}" fill="#f4c542" fill-opacity="0.3"/>"##,
            sx(a),
            (sx(b) - sx(a)).max(1.0)
        )
        .unwrap();
    }
    writeln!(s, r#"<path d="M{LEFT:.2},{TOP:.2} V{:.2} H{:.2}" fill="none" stroke="black"/>"#, TOP + ph, LEFT + pw)
        .unwrap();
    for k in 0..=4 {
        let xv = x0 + (x1 - x0) * k as f64 / 4.0;
        let yv = y0 + (y1 - y0) * k as f64 / 4.0;
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xv:.3}</text>"#, sx(xv), TOP + ph + 18.0)
            .unwrap();
        writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.3}</text>"#, LEFT - 6.0, sy(yv) + 4.0).unwrap();
    }
    writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(plot.x_label)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(plot.y_label)
    )
    .unwrap();
    writeln!(
        s,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(plot.title)
    )
    .unwrap();
    for (i, series) in plot.series.iter().enumerate() {
        let pts: Vec<String> = series.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        writeln!(s, r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#, pts.join(" "), series.color)
            .unwrap();
        let ly = TOP + 14.0 + 16.0 * i as f64;
        writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            LEFT + 10.0,
            LEFT + 30.0,
            series.color,
            LEFT + 36.0,
            ly + 4.0,
            escape(series.label)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
