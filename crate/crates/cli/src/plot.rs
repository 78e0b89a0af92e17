//! Minimal SVG line plot with a logarithmic y axis.

use std::fmt::Write;

use crate::history::HistoryRow;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// (k, residual); non-positive residuals are skipped.
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn from_history(label: impl Into<String>, rows: &[HistoryRow]) -> Self {
        Self { label: label.into(), points: rows.iter().map(|r| (r.k as f64, r.residual)).collect() }
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Tick spacing of the form {1, 2, 5}·10ⁿ giving at most `max` intervals.
fn nice_step(span: f64, max: usize) -> f64 {
    let raw = span / max as f64;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

/// Residual-decay plot: iteration on x, residual on a log axis.
pub fn residual_plot(title: &str, series: &[Series]) -> String {
    let pts = || series.iter().flat_map(|s| s.points.iter()).filter(|p| p.1 > 0.0 && p.1.is_finite());
    let xmax = pts().map(|p| p.0).fold(1.0f64, f64::max);
    let lo = pts().map(|p| p.1.log10()).fold(f64::INFINITY, f64::min);
    let hi = pts().map(|p| p.1.log10()).fold(f64::NEG_INFINITY, f64::max);
    let (mut ylo, mut yhi) = if lo.is_finite() { (lo.floor(), hi.ceil()) } else { (-1.0, 0.0) };
    if yhi <= ylo {
        ylo -= 1.0;
        yhi += 1.0;
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + x / xmax * pw;
    let sy = |ly: f64| TOP + (yhi - ly) / (yhi - ylo) * ph;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(title));

    let ystep = nice_step(yhi - ylo, 10).max(1.0);
    let mut d = ylo;
    while d <= yhi + 1e-9 {
        let y = sy(d);
        let _ = writeln!(out, r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##, LEFT + pw);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"#, LEFT - 6.0, y + 4.0, d as i64);
        d += ystep;
    }
    let xstep = nice_step(xmax, 10).max(1.0);
    let mut k = 0.0;
    while k <= xmax + 1e-9 {
        let x = sx(k);
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#000"/>"##, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, k as i64);
        k += xstep;
    }
    let _ = writeln!(out, r##"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#000"/>"##);
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">iteration k</text>"#, LEFT + pw / 2.0, HEIGHT - 10.0);
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">residual</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.1 > 0.0 && p.1.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y.log10())))
            .collect();
        if !coords.is_empty() {
            let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, coords.join(" "));
        }
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(out, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_and_escaping() {
        assert_eq!(nice_step(37.0, 10), 5.0);
        assert_eq!(nice_step(6.0, 10), 1.0);
        let svg = residual_plot("a < b", &[Series { label: "x&y".into(), points: vec![(0.0, 1.0), (1.0, 0.1), (2.0, 0.0)] }]);
        assert!(svg.contains("a &lt; b") && svg.contains("x&amp;y"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_plot_is_valid() {
        let svg = residual_plot("empty", &[]);
        assert!(svg.starts_with("<svg") && !svg.contains("NaN") && !svg.contains("inf"));
    }
}
