//! Static SVG chart: test-window actual vs predicted, then the forecast fan.

use std::fmt::Write;

use crate::commands::{ForecastReport, TestWindow};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 48.0;
const BOTTOM: f64 = 56.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Share of the plot width given to the forecast horizon; a long test window
/// would otherwise squeeze the fan into a sliver.
const HORIZON_SHARE: f64 = 0.2;

/// Piecewise x axis: the test window fills the left part, the horizon the rest.
struct Scale {
    n_test: usize,
    n_fc: usize,
    lo: f64,
    hi: f64,
}

impl Scale {
    fn x(&self, i: usize) -> f64 {
        let plot = WIDTH - LEFT - RIGHT;
        if self.n_fc == 0 {
            return LEFT + plot * i as f64 / (self.n_test.max(2) - 1) as f64;
        }
        let split = plot * (1.0 - HORIZON_SHARE);
        if i < self.n_test {
            LEFT + split * i as f64 / self.n_test.max(2).saturating_sub(1) as f64
        } else {
            let h = (i - self.n_test + 1) as f64;
            LEFT + split + (plot - split) * h / self.n_fc as f64
        }
    }

    fn y(&self, v: f64) -> f64 {
        TOP + (HEIGHT - TOP - BOTTOM) * (self.hi - v) / (self.hi - self.lo)
    }
}

fn points(scale: &Scale, pts: impl Iterator<Item = (usize, f64)>) -> String {
    pts.map(|(i, v)| format!("{:.2},{:.2}", scale.x(i), scale.y(v)))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn render(window: &TestWindow, fc: &ForecastReport) -> String {
    let n_test = window.dates.len();
    let n = n_test + fc.rows.len();
    let values = window
        .actual
        .iter()
        .chain(&window.predicted)
        .copied()
        .chain(fc.rows.iter().flat_map(|r| [r.lower, r.upper, r.point]));
    let (mut lo, mut hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
        (a.min(v), b.max(v))
    });
    if hi - lo < 1e-12 {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let scale = Scale {
        n_test,
        n_fc: fc.rows.len(),
        lo: lo - pad,
        hi: hi + pad,
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let pct = fc.level * 100.0;
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="24" font-size="15">{} : actual vs predicted (test window) and {}-day forecast, {pct:.0}% intervals, inflation {}</text>"#,
        escape(&fc.proxy),
        fc.rows.len(),
        fc.inflation
    );

    // Axes and horizontal grid.
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (TOP, HEIGHT - BOTTOM);
    let _ = writeln!(
        s,
        r##"<g id="axes" stroke="#444"><line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}"/><line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/></g>"##
    );
    let _ = writeln!(s, r##"<g id="y-ticks" fill="#444">"##);
    for k in 0..=4 {
        let v = scale.lo + (scale.hi - scale.lo) * k as f64 / 4.0;
        let y = scale.y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{x0}" y1="{y:.2}" x2="{x1}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{v:.2}</text>"##,
            x0 - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(s, "</g>");

    let mut labels = vec![(0, window.dates[0].to_string())];
    labels.push((n_test - 1, window.dates[n_test - 1].to_string()));
    if let Some(last) = fc.rows.last() {
        labels.push((n - 1, last.date.to_string()));
    }
    let _ = writeln!(s, r##"<g id="x-labels" fill="#444" text-anchor="middle">"##);
    for (i, label) in labels {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}">{label}</text>"#,
            scale.x(i),
            y1 + 18.0
        );
    }
    let _ = writeln!(s, "</g>");

    if !fc.rows.is_empty() {
        let x = scale.x(n_test - 1);
        let _ = writeln!(
            s,
            r##"<line id="forecast-origin" x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{y1}" stroke="#999" stroke-dasharray="4 3"/>"##
        );
        let upper = fc
            .rows
            .iter()
            .enumerate()
            .map(|(h, r)| (n_test + h, r.upper));
        let lower = fc
            .rows
            .iter()
            .enumerate()
            .rev()
            .map(|(h, r)| (n_test + h, r.lower));
        let _ = writeln!(
            s,
            r##"<polygon id="interval-fan" fill="#f4a259" fill-opacity="0.3" stroke="none" points="{}"/>"##,
            points(&scale, upper.chain(lower))
        );
    }
    let _ = writeln!(
        s,
        r##"<polyline id="actual-line" fill="none" stroke="#1f77b4" stroke-width="1.2" points="{}"/>"##,
        points(&scale, window.actual.iter().copied().enumerate())
    );
    let _ = writeln!(
        s,
        r##"<polyline id="predicted-line" fill="none" stroke="#ff7f0e" stroke-width="1.2" points="{}"/>"##,
        points(&scale, window.predicted.iter().copied().enumerate())
    );
    if !fc.rows.is_empty() {
        let _ = writeln!(
            s,
            r##"<polyline id="forecast-line" fill="none" stroke="#d62728" stroke-width="1.8" points="{}"/>"##,
            points(
                &scale,
                fc.rows
                    .iter()
                    .enumerate()
                    .map(|(h, r)| (n_test + h, r.point))
            )
        );
    }

    let legend = [
        ("#1f77b4", "actual"),
        ("#ff7f0e", "predicted"),
        ("#d62728", "forecast"),
        ("#f4a259", "interval"),
    ];
    let _ = writeln!(s, r#"<g id="legend">"#);
    for (k, (color, label)) in legend.iter().enumerate() {
        let x = x1 - 380.0 + 95.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{x}" y="32" width="14" height="8" fill="{color}"/><text x="{}" y="40">{label}</text>"#,
            x + 18.0
        );
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}
