//! Static SVG charts: data markers, model curves and labelled points.
//!
//! Charts only read the numbers they are given.

use std::fmt::Write as _;

use crate::error::Result;
use crate::superposition::Superposition;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub style: Style,
}

#[derive(Debug, Clone)]
pub struct Annotation {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub annotations: Vec<Annotation>,
}

impl Chart {
    pub fn new(title: impl Into<String>) -> Self {
        Self { title: title.into(), x_label: "H (A/m)".into(), y_label: "B (T)".into(), ..Self::default() }
    }

    pub fn line(mut self, label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series { label: label.into(), points, style: Style::Line });
        self
    }

    pub fn markers(mut self, label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series { label: label.into(), points, style: Style::Markers });
        self
    }

    pub fn annotate(mut self, label: impl Into<String>, x: f64, y: f64) -> Self {
        self.annotations.push(Annotation { label: label.into(), x, y });
        self
    }

    pub fn to_svg(&self) -> String {
        let (xr, yr) = self.bounds();
        let sx = |x: f64| MARGIN + (x - xr.0) / (xr.1 - xr.0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - yr.0) / (yr.1 - yr.0) * (HEIGHT - 2.0 * MARGIN);

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#, right - left, bottom - top);
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = xr.0 + t * (xr.1 - xr.0);
            let yv = yr.0 + t * (yr.1 - yr.0);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, sx(xv), bottom + 16.0, tick(xv));
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, left - 6.0, sy(yv) + 4.0, tick(yv));
        }
        if xr.0 < 0.0 && xr.1 > 0.0 {
            let _ = writeln!(s, r##"<line x1="{0:.1}" y1="{top}" x2="{0:.1}" y2="{bottom}" stroke="#bbb"/>"##, sx(0.0));
        }
        if yr.0 < 0.0 && yr.1 > 0.0 {
            let _ = writeln!(s, r##"<line x1="{left}" y1="{0:.1}" x2="{right}" y2="{0:.1}" stroke="#bbb"/>"##, sy(0.0));
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 18.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );

        for (i, series) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            match series.style {
                Style::Line => {
                    let pts: Vec<String> =
                        series.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                    let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
                }
                Style::Markers => {
                    for &(x, y) in &series.points {
                        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, sx(x), sy(y));
                    }
                }
            }
            let ly = top + 16.0 + 16.0 * i as f64;
            let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/>"#, left + 10.0, ly - 9.0);
            let _ = writeln!(s, r#"<text x="{}" y="{ly}">{}</text>"#, left + 26.0, escape(&series.label));
        }
        for a in &self.annotations {
            let (px, py) = (sx(a.x), sy(a.y));
            let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="5" fill="none" stroke="black" stroke-width="1.5"/>"#);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, px + 8.0, py - 8.0, escape(&a.label));
        }
        s.push_str("</svg>\n");
        s
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let all = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .chain(self.annotations.iter().map(|a| (a.x, a.y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite());
        let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
        let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in all {
            xr = (xr.0.min(x), xr.1.max(x));
            yr = (yr.0.min(y), yr.1.max(y));
        }
        (pad(xr), pad(yr))
    }
}

/// `n` evenly spaced samples of the model over `[lo, hi]`.
pub fn sample_model(sup: &Superposition, lo: f64, hi: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            let x = if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
            Ok((x, sup.eval(x)?))
        })
        .collect()
}

fn pad((lo, hi): (f64, f64)) -> (f64, f64) {
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        return (lo - 1.0, hi + 1.0);
    }
    let d = 0.05 * (hi - lo);
    (lo - d, hi + d)
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-3..1e5).contains(&v.abs()) {
        format!("{}", (v * 1e3).round() / 1e3)
    } else {
        format!("{v:.2e}")
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superposition::Component;

    #[test]
    fn svg_contains_all_layers() {
        let sup = Superposition::new(1.0, vec![Component::new(1.0, 0.5, 0.0, 0.0)]).unwrap();
        let svg = Chart::new("S <curve>")
            .line("model", sample_model(&sup, -5.0, 5.0, 50).unwrap())
            .markers("data", vec![(-1.0, -0.4), (1.0, 0.4)])
            .annotate("x0", 0.0, 0.0)
            .to_svg();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains("S &lt;curve&gt;"));
        assert!(svg.contains(">x0<"));
    }

    #[test]
    fn empty_chart_renders() {
        let svg = Chart::new("empty").to_svg();
        assert!(svg.contains("</svg>"));
    }
}
