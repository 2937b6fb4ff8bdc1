//! CSV tables and standalone SVG plots. Numbers are written with fixed
//! formats so that re-runs produce the same bytes.

use std::fmt::Write;

use anyhow::Result;

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Comma separated with a header row; the config hash is the last column.
    pub fn to_csv(&self, hash: &str) -> Result<String> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let mut header = self.header.clone();
        header.push("config_hash".into());
        w.write_record(&header)?;
        for r in &self.rows {
            let mut r = r.clone();
            r.push(hash.into());
            w.write_record(&r)?;
        }
        Ok(String::from_utf8(w.into_inner()?)?)
    }
}

/// Shortest round-trip form; empty for a missing value.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
    /// Horizontal reference lines (value, label).
    pub rules: Vec<(f64, String)>,
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const M: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f5fa8", "#b8452a", "#2e7d32", "#6a3d9a"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, title: &str, hash: &str) {
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(out, "<title>{}</title>", esc(title));
    let _ = writeln!(out, "<desc>config_hash {hash}</desc>");
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
}

impl Plot {
    fn y(&self, v: f64) -> Option<f64> {
        match self.log_y {
            true if v > 0.0 => Some(v.log10()),
            true => None,
            false => v.is_finite().then_some(v),
        }
    }

    pub fn to_svg(&self, hash: &str) -> String {
        let pts: Vec<(f64, f64)> = self.series.iter().flat_map(|s| s.points.iter().filter_map(|&(x, v)| Some((x, self.y(v)?)))).collect();
        let rules: Vec<f64> = self.rules.iter().filter_map(|(v, _)| self.y(*v)).collect();
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if lo > hi {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        let (x0, x1) = span(&mut pts.iter().map(|p| p.0));
        let (y0, y1) = span(&mut pts.iter().map(|p| p.1).chain(rules.iter().copied()));
        let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
        let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);

        let mut out = String::new();
        header(&mut out, &self.title, hash);
        let _ = writeln!(out, r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#, W / 2.0, esc(&self.title));
        let _ = writeln!(out, r#"<path d="M{M} {M} V{} H{}" fill="none" stroke="black"/>"#, H - M, W - M);
        let tick = |v: f64| if self.log_y { format!("1e{v:.1}") } else { format!("{v:.3e}") };
        for k in 0..=4 {
            let yv = y0 + (y1 - y0) * k as f64 / 4.0;
            let xv = x0 + (x1 - x0) * k as f64 / 4.0;
            let _ = writeln!(out, r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#, M - 4.0, sy(yv) + 3.0, tick(yv));
            let _ = writeln!(out, r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#, sx(xv), H - M + 14.0, format_args!("{xv:.4}"));
        }
        let _ = writeln!(out, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#, W / 2.0, H - 18.0, esc(&self.x_label));
        let _ = writeln!(
            out,
            r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            esc(&if self.log_y { format!("{} (log10)", self.y_label) } else { self.y_label.clone() })
        );
        for ((v, label), y) in self.rules.iter().zip(self.rules.iter().map(|(v, _)| self.y(*v))) {
            let Some(y) = y else { continue };
            let _ = writeln!(out, r#"<path d="M{M} {:.2} H{}" stroke="gray" stroke-dasharray="4 3"/>"#, sy(y), W - M);
            let _ = writeln!(out, r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="10" fill="gray">{} = {}</text>"#, W - M + 2.0, sy(y) - 3.0, esc(label), num(*v));
        }
        for (i, s) in self.series.iter().enumerate() {
            let c = COLORS[i % COLORS.len()];
            let p: Vec<(f64, f64)> = s.points.iter().filter_map(|&(x, v)| Some((sx(x), sy(self.y(v)?)))).collect();
            if p.len() > 1 {
                let d: Vec<String> = p.iter().enumerate().map(|(k, (x, y))| format!("{}{x:.2} {y:.2}", if k == 0 { "M" } else { "L" })).collect();
                let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{c}" stroke-width="1.5"/>"#, d.join(" "));
            }
            for (x, y) in &p {
                let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{c}"/>"#);
            }
            let _ = writeln!(out, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{c}">{}</text>"#, M + 8.0, M + 14.0 * (i as f64 + 1.0), esc(&s.name));
        }
        out.push_str("</svg>\n");
        out
    }
}

/// Closed curves in the plane (boundaries of disks), drawn in a fixed window.
pub struct CurvePlot {
    pub title: String,
    pub window: f64,
    /// (label, polyline pieces).
    pub curves: Vec<(String, Vec<Vec<(f64, f64)>>)>,
}

impl CurvePlot {
    pub fn to_svg(&self, hash: &str) -> String {
        let side = H - 2.0 * M;
        let s = |x: f64, y: f64| ((W - side) / 2.0 + (x + self.window) / (2.0 * self.window) * side, M + (self.window - y) / (2.0 * self.window) * side);
        let mut out = String::new();
        header(&mut out, &self.title, hash);
        let _ = writeln!(out, r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#, W / 2.0, esc(&self.title));
        let (l, t) = s(-self.window, self.window);
        let _ = writeln!(out, r#"<rect x="{l:.2}" y="{t:.2}" width="{side}" height="{side}" fill="none" stroke="black"/>"#);
        for (i, (label, pieces)) in self.curves.iter().enumerate() {
            let c = COLORS[(i / 2) % COLORS.len()];
            let dash = if i % 2 == 1 { r#" stroke-dasharray="5 3""# } else { "" };
            for piece in pieces.iter().filter(|p| p.len() > 1) {
                let d: Vec<String> = piece
                    .iter()
                    .enumerate()
                    .map(|(k, &(x, y))| {
                        let (px, py) = s(x, y);
                        format!("{}{px:.2} {py:.2}", if k == 0 { "M" } else { "L" })
                    })
                    .collect();
                let _ = writeln!(out, r#"<path d="{}" fill="none" stroke="{c}" stroke-width="1.5"{dash}/>"#, d.join(" "));
            }
            let _ = writeln!(out, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="{c}">{}</text>"#, W - M - 50.0, M + 14.0 * (i as f64 + 1.0), esc(label));
        }
        let _ = writeln!(out, r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10" text-anchor="middle">window [-{w}, {w}]^2</text>"#, W / 2.0, H - 18.0, w = self.window);
        out.push_str("</svg>\n");
        out
    }
}
