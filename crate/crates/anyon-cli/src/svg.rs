//! Minimal SVG plots: heat maps, colour-coded scatter plots and line plots.
//!
//! Output depends only on the inputs; numbers are printed with fixed
//! precision so re-runs are byte-identical.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 100.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

/// Approximate viridis, as (r, g, b) stops.
const STOPS: [(f64, f64, f64); 5] =
    [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];

pub fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (STOPS.len() - 1) as f64;
    let i = (x.floor() as usize).min(STOPS.len() - 2);
    let f = x - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |p: f64, q: f64| (p + f * (q - p)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Axis labels and an optional description embedded as `<desc>`.
pub struct Frame<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub desc: &'a str,
}

struct Axes {
    x: (f64, f64),
    y: (f64, f64),
    log_y: bool,
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / span(self.x) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let (v, lo, hi) = if self.log_y { (y.log10(), self.y.0.log10(), self.y.1.log10()) } else { (y, self.y.0, self.y.1) };
        HEIGHT - BOTTOM - (v - lo) / span((lo, hi)) * (HEIGHT - TOP - BOTTOM)
    }
}

fn span((lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        hi - lo
    } else {
        1.0
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo > hi {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// About five round tick values covering [lo, hi].
fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    if raw <= 0.0 || !raw.is_finite() {
        return vec![lo];
    }
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn open(out: &mut String, frame: &Frame) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, "<desc>{}</desc>", escape(frame.desc));
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(frame.title));
}

fn axes(out: &mut String, frame: &Frame, a: &Axes) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(out, r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#, x1 - x0, y0 - y1);
    for t in ticks(a.x.0, a.x.1) {
        let x = a.px(t);
        let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, y0 + 18.0, fmt_tick(t));
    }
    let y_ticks = if a.log_y {
        let (lo, hi) = (a.y.0.log10().floor() as i32, a.y.1.log10().ceil() as i32);
        (lo..=hi).map(|e| 10f64.powi(e)).filter(|v| *v >= a.y.0 && *v <= a.y.1).collect()
    } else {
        ticks(a.y.0, a.y.1)
    };
    for t in y_ticks {
        let y = a.py(t);
        let _ = writeln!(out, r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, y + 4.0, fmt_tick(t));
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 18.0, escape(frame.x_label));
    let _ = writeln!(
        out,
        r#"<text transform="translate(20 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (y0 + y1) / 2.0,
        escape(frame.y_label)
    );
}

fn colorbar(out: &mut String, lo: f64, hi: f64, label: &str) {
    let (x, y0, y1) = (WIDTH - RIGHT + 20.0, HEIGHT - BOTTOM, TOP);
    let steps = 32;
    let h = (y0 - y1) / steps as f64;
    for k in 0..steps {
        let t = (k as f64 + 0.5) / steps as f64;
        let _ = writeln!(out, r#"<rect x="{x}" y="{:.2}" width="16" height="{:.2}" fill="{}"/>"#, y0 - (k + 1) as f64 * h, h + 0.3, color(t));
    }
    let _ = writeln!(out, r#"<text x="{}" y="{:.2}">{}</text>"#, x + 20.0, y1 + 10.0, fmt_tick(hi));
    let _ = writeln!(out, r#"<text x="{}" y="{:.2}">{}</text>"#, x + 20.0, y0, fmt_tick(lo));
    let _ = writeln!(out, r#"<text x="{x}" y="{:.2}">{}</text>"#, y1 - 8.0, escape(label));
}

/// Heat map of `grid[row][col]`; row 0 at the bottom, cells labelled from 1.
pub fn heatmap(grid: &[Vec<f64>], frame: &Frame, value_label: &str) -> String {
    let rows = grid.len();
    let cols = grid.first().map_or(0, Vec::len);
    let (lo, hi) = range(grid.iter().flatten().copied());
    let a = Axes { x: (0.5, cols as f64 + 0.5), y: (0.5, rows as f64 + 0.5), log_y: false };
    let mut out = String::new();
    open(&mut out, frame);
    let (w, h) = (a.px(1.5) - a.px(0.5), a.py(0.5) - a.py(1.5));
    for (r, row) in grid.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                a.px(c as f64 + 0.5),
                a.py(r as f64 + 1.5),
                w + 0.2,
                h + 0.2,
                color((v - lo) / span((lo, hi)))
            );
        }
    }
    axes(&mut out, frame, &a);
    colorbar(&mut out, lo, hi, value_label);
    out.push_str("</svg>\n");
    out
}

/// Points (x, y, value) coloured by value.
pub fn scatter(points: &[(f64, f64, f64)], frame: &Frame, value_label: &str) -> String {
    let a = Axes { x: range(points.iter().map(|p| p.0)), y: range(points.iter().map(|p| p.1)), log_y: false };
    let (lo, hi) = range(points.iter().map(|p| p.2));
    let mut out = String::new();
    open(&mut out, frame);
    // Draw the most localized points last so they stay visible.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].2.total_cmp(&points[j].2));
    for i in order {
        let (x, y, v) = points[i];
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="1.8" fill="{}"/>"#, a.px(x), a.py(y), color((v - lo) / span((lo, hi))));
    }
    axes(&mut out, frame, &a);
    colorbar(&mut out, lo, hi, value_label);
    out.push_str("</svg>\n");
    out
}

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

const LINE_COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line plot; with `log_y` non-positive values are dropped.
pub fn line_plot(series: &[Series], frame: &Frame, log_y: bool) -> String {
    let keep = |y: f64| y.is_finite() && (!log_y || y > 0.0);
    let all = || series.iter().flat_map(|s| s.points.iter()).filter(|p| keep(p.1));
    let x = range(all().map(|p| p.0));
    let mut y = range(all().map(|p| p.1));
    if log_y {
        y = (10f64.powf(y.0.log10().floor()), 10f64.powf(y.1.log10().ceil()));
        if y.0 == y.1 {
            y.1 *= 10.0;
        }
    }
    let a = Axes { x, y, log_y };
    let mut out = String::new();
    open(&mut out, frame);
    for (k, s) in series.iter().enumerate() {
        let c = LINE_COLORS[k % LINE_COLORS.len()];
        let mut path = String::new();
        for &(px, py) in s.points.iter().filter(|p| keep(p.1)) {
            let _ = write!(path, "{:.2},{:.2} ", a.px(px), a.py(py));
        }
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="1.2"/>"#, path.trim_end());
        let ly = TOP + 14.0 + 16.0 * k as f64;
        let lx = WIDTH - RIGHT + 8.0;
        let _ = writeln!(out, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"/>"#, lx + 14.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, lx + 18.0, ly + 4.0, escape(s.label));
    }
    axes(&mut out, frame, &a);
    out.push_str("</svg>\n");
    out
}
