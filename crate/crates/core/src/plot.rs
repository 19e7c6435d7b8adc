//! Minimal SVG emitter: axes, polylines, scatter, histogram and heat map.
//!
//! Output depends only on the inputs, so equal data gives byte-identical files.

use std::fmt::Write;

use crate::matlib::DenseMatrix;
use crate::model::{ModelFamily, ModelParams};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// Categorical palette; index 0 is used for outliers / unlabelled data.
pub const PALETTE: [&str; 10] = [
    "#9e9e9e", "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22",
];

pub fn color(label: usize) -> &'static str {
    if label == 0 {
        PALETTE[0]
    } else {
        PALETTE[1 + (label - 1) % (PALETTE.len() - 1)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub min: f64,
    pub max: f64,
}

impl Range {
    pub fn new(min: f64, max: f64) -> Self {
        if max > min {
            Self { min, max }
        } else {
            let pad = if min == 0.0 { 1.0 } else { min.abs() * 0.5 };
            Self { min: min - pad, max: max + pad }
        }
    }

    /// Tight range over finite values, `[0, 1]` when there are none.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let (lo, hi) = values
            .into_iter()
            .filter(|v| v.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if lo.is_finite() {
            Self::new(lo, hi)
        } else {
            Self::new(0.0, 1.0)
        }
    }

    fn fraction(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }
}

/// Plot area with data-to-pixel mapping. Elements are appended in call order.
pub struct Canvas {
    x: Range,
    y: Range,
    body: String,
}

fn num(x: f64) -> String {
    let s = format!("{x:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn tick_label(x: f64) -> String {
    if x != 0.0 && (x.abs() >= 1e4 || x.abs() < 1e-3) {
        format!("{x:.1e}")
    } else {
        format!("{:.3}", x).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Canvas {
    pub fn new(title: &str, x_label: &str, y_label: &str, x: Range, y: Range) -> Self {
        let mut canvas = Self { x, y, body: String::new() };
        canvas.axes(title, x_label, y_label);
        canvas
    }

    pub fn px(&self, x: f64) -> f64 {
        MARGIN + self.x.fraction(x) * (WIDTH - 2.0 * MARGIN)
    }

    pub fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - self.y.fraction(y) * (HEIGHT - 2.0 * MARGIN)
    }

    fn axes(&mut self, title: &str, x_label: &str, y_label: &str) {
        let (left, right) = (MARGIN, WIDTH - MARGIN);
        let (top, bottom) = (MARGIN, HEIGHT - MARGIN);
        let b = &mut self.body;
        let _ = writeln!(
            b,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            num(left),
            num(top),
            num(right - left),
            num(bottom - top)
        );
        let _ = writeln!(
            b,
            r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>"#,
            num(WIDTH / 2.0),
            escape(title)
        );
        let _ = writeln!(
            b,
            r#"<text x="{}" y="{}" text-anchor="middle" font-size="13">{}</text>"#,
            num(WIDTH / 2.0),
            num(HEIGHT - 15.0),
            escape(x_label)
        );
        let _ = writeln!(
            b,
            r#"<text x="15" y="{}" text-anchor="middle" font-size="13" transform="rotate(-90 15 {})">{}</text>"#,
            num(HEIGHT / 2.0),
            num(HEIGHT / 2.0),
            escape(y_label)
        );
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            let xv = self.x.min + t * (self.x.max - self.x.min);
            let yv = self.y.min + t * (self.y.max - self.y.min);
            let (xp, yp) = (self.px(xv), self.py(yv));
            let b = &mut self.body;
            let _ = writeln!(
                b,
                r#"<line x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="black"/><text x="{0}" y="{3}" text-anchor="middle" font-size="11">{4}</text>"#,
                num(xp),
                num(bottom),
                num(bottom + 5.0),
                num(bottom + 18.0),
                tick_label(xv)
            );
            let _ = writeln!(
                b,
                r#"<line x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="black"/><text x="{3}" y="{4}" text-anchor="end" font-size="11">{5}</text>"#,
                num(left - 5.0),
                num(yp),
                num(left),
                num(left - 8.0),
                num(yp + 4.0),
                tick_label(yv)
            );
        }
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str) {
        let finite: Vec<String> = points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{},{}", num(self.px(x)), num(self.py(y))))
            .collect();
        if finite.len() >= 2 {
            let _ = writeln!(
                self.body,
                r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#,
                finite.join(" ")
            );
        }
    }

    pub fn scatter(&mut self, points: &[(f64, f64)], fill: &str, radius: f64) {
        for &(x, y) in points.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            let _ = writeln!(
                self.body,
                r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
                num(self.px(x)),
                num(self.py(y)),
                num(radius)
            );
        }
    }

    /// Axis-aligned rectangle between two data corners.
    pub fn rect(&mut self, x0: f64, y0: f64, x1: f64, y1: f64, fill: &str) {
        let (a, b) = (self.px(x0.min(x1)), self.px(x0.max(x1)));
        let (c, d) = (self.py(y0.max(y1)), self.py(y0.min(y1)));
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"/>"#,
            num(a),
            num(c),
            num(b - a),
            num(d - c)
        );
    }

    /// Text legend entries stacked in the top right corner.
    pub fn legend(&mut self, entries: &[(String, &str)]) {
        for (k, (label, fill)) in entries.iter().enumerate() {
            let y = MARGIN + 16.0 + 16.0 * k as f64;
            let _ = writeln!(
                self.body,
                r#"<rect x="{}" y="{}" width="10" height="10" fill="{fill}"/><text x="{}" y="{}" font-size="11">{}</text>"#,
                num(WIDTH - MARGIN - 110.0),
                num(y - 9.0),
                num(WIDTH - MARGIN - 95.0),
                num(y),
                escape(label)
            );
        }
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = WIDTH,
            h = HEIGHT
        )
    }
}

/// One curve of a line plot.
pub struct Series<'a> {
    pub label: String,
    pub points: &'a [(f64, f64)],
}

pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>]) -> String {
    let x = Range::of(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let y = Range::of(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let mut canvas = Canvas::new(title, x_label, y_label, x, y);
    let mut legend = Vec::new();
    for (k, s) in series.iter().enumerate() {
        let stroke = color(k + 1);
        canvas.polyline(s.points, stroke);
        if s.points.len() == 1 {
            canvas.scatter(s.points, stroke, 3.0);
        }
        legend.push((s.label.clone(), stroke));
    }
    if series.len() > 1 {
        canvas.legend(&legend);
    }
    canvas.finish()
}

/// Histogram of `values` over `bins` equal-width bins.
pub fn histogram(title: &str, x_label: &str, values: &[f64], bins: usize) -> String {
    let bins = bins.max(1);
    let range = Range::of(values.iter().copied());
    let width = (range.max - range.min) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values.iter().filter(|v| v.is_finite()) {
        let k = (((v - range.min) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let top = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let mut canvas = Canvas::new(title, x_label, "count", range, Range::new(0.0, top));
    for (k, &c) in counts.iter().enumerate() {
        if c > 0 {
            let x0 = range.min + k as f64 * width;
            canvas.rect(x0, 0.0, x0 + width, c as f64, color(1));
        }
    }
    canvas.finish()
}

/// Labelled 2D points, optionally with extra curves drawn on top.
pub fn scatter_labels(title: &str, points: &[Vec<f64>], labels: &[usize], overlays: &[(usize, Vec<(f64, f64)>)]) -> String {
    let x = Range::of(points.iter().map(|p| p[0]).chain(overlays.iter().flat_map(|o| o.1.iter().map(|p| p.0))));
    let y = Range::of(points.iter().map(|p| p[1]).chain(overlays.iter().flat_map(|o| o.1.iter().map(|p| p.1))));
    let mut canvas = Canvas::new(title, "x", "y", x, y);
    let mut order: Vec<usize> = labels.to_vec();
    order.sort_unstable();
    order.dedup();
    for &l in &order {
        let group: Vec<(f64, f64)> = points
            .iter()
            .zip(labels)
            .filter(|(_, &k)| k == l)
            .map(|(p, _)| (p[0], p[1]))
            .collect();
        canvas.scatter(&group, color(l), if l == 0 { 1.5 } else { 2.5 });
    }
    for (label, curve) in overlays {
        canvas.polyline(curve, color(*label));
    }
    canvas.finish()
}

/// Sampled outline of a planar model inside the box `x × y`; empty for
/// two-view families.
pub fn model_curve(model: &ModelParams, x: Range, y: Range) -> Vec<(f64, f64)> {
    let t = &model.theta;
    match model.family {
        ModelFamily::Line2D => {
            let (nx, ny, c) = (t[0], t[1], t[2]);
            let (cx, cy) = ((x.min + x.max) / 2.0, (y.min + y.max) / 2.0);
            // Foot of the perpendicular from the box centre, then both ways along the line.
            let off = nx * cx + ny * cy + c;
            let (px, py) = (cx - off * nx, cy - off * ny);
            let reach = (x.max - x.min).hypot(y.max - y.min);
            let inside = |(a, b): (f64, f64)| a >= x.min && a <= x.max && b >= y.min && b <= y.max;
            let pts: Vec<(f64, f64)> = (0..=400)
                .map(|k| {
                    let s = reach * (k as f64 / 200.0 - 1.0);
                    (px - s * ny, py + s * nx)
                })
                .filter(|&p| inside(p))
                .collect();
            match (pts.first(), pts.last()) {
                (Some(&a), Some(&b)) if pts.len() >= 2 => vec![a, b],
                _ => Vec::new(),
            }
        }
        ModelFamily::Circle2D => (0..=120)
            .map(|k| {
                let a = std::f64::consts::TAU * k as f64 / 120.0;
                (t[0] + t[2] * a.cos(), t[1] + t[2] * a.sin())
            })
            .collect(),
        ModelFamily::Homography | ModelFamily::Fundamental => Vec::new(),
    }
}

/// Planar data coloured by label with the fitted models drawn over it; model
/// `t` is drawn in the colour of label `t + 1`.
pub fn fit_overlay(title: &str, points: &[Vec<f64>], labels: &[usize], models: &[ModelParams]) -> String {
    let x = Range::of(points.iter().map(|p| p[0]));
    let y = Range::of(points.iter().map(|p| p[1]));
    let overlays: Vec<(usize, Vec<(f64, f64)>)> =
        models.iter().enumerate().map(|(t, model)| (t + 1, model_curve(model, x, y))).collect();
    scatter_labels(title, points, labels, &overlays)
}

/// Gray-scale heat map of a matrix with values in `[0, max]`, row 0 at the top.
pub fn heat_map(title: &str, matrix: &DenseMatrix) -> String {
    let (rows, cols) = matrix.shape();
    let top = matrix.max().max(f64::MIN_POSITIVE);
    let mut canvas = Canvas::new(
        title,
        "column",
        "row",
        Range::new(0.0, cols.max(1) as f64),
        Range::new(-(rows.max(1) as f64), 0.0),
    );
    for i in 0..rows {
        for j in 0..cols {
            let v = matrix.get(i, j);
            if v > 0.0 {
                let shade = 255 - ((v / top).clamp(0.0, 1.0) * 255.0).round() as u8;
                let fill = format!("#{shade:02x}{shade:02x}{shade:02x}");
                canvas.rect(j as f64, -(i as f64), (j + 1) as f64, -((i + 1) as f64), &fill);
            }
        }
    }
    canvas.finish()
}
