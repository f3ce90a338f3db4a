//! CSV text and dependency-free SVG plots.

use std::fmt::Write;

/// A named output file.
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv { text: header.join(",") + "\n" }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text += &cells.join(",");
        self.text.push('\n');
    }

    pub fn finish(self, name: &str) -> Artifact {
        Artifact { name: name.into(), contents: self.text }
    }
}

pub fn num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        let s = format!("{v:.10}");
        if s == "-0.0000000000" { "0.0000000000".into() } else { s }
    }
}

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub points: Vec<[f64; 2]>,
    /// Draw as a filled outline rather than an open curve.
    pub closed: bool,
}

const W: f64 = 560.0;
const H: f64 = 420.0;
const PAD: f64 = 56.0;

pub fn svg_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in series.iter().flat_map(|s| s.points.iter()) {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let widen = |lo: f64, hi: f64| if hi - lo > 0.0 { (lo - 0.05 * (hi - lo) * f64::from(u8::from(lo < 0.0)), hi + 0.05 * (hi - lo)) } else { (0.0, 1.0) };
    let (x0, x1) = widen(x0, x1);
    let (y0, y1) = widen(y0, y1);
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        out,
        r#"<path d="M {:.2} {:.2} L {:.2} {:.2} L {:.2} {:.2}" fill="none" stroke="black"/>"#,
        sx(x0),
        sy(y1),
        sx(x0),
        sy(y0),
        sx(x1),
        sy(y0)
    );
    for k in 0..=4 {
        let (xv, yv) = (x0 + (x1 - x0) * k as f64 / 4.0, y0 + (y1 - y0) * k as f64 / 4.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="11">{xv:.3}</text>"#, sx(xv), H - PAD + 16.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{yv:.3}</text>"#, PAD - 6.0, sy(yv) + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#, W / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s.points.iter().map(|p| format!("{:.2},{:.2}", sx(p[0]), sy(p[1]))).collect();
        if s.closed {
            let _ = writeln!(out, r#"<polygon points="{}" fill="{}" fill-opacity="0.15" stroke="{}" stroke-width="2"/>"#, pts.join(" "), s.color, s.color);
        } else {
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#, pts.join(" "), s.color);
        }
        let ly = PAD + 18.0 * i as f64;
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"/>"#, W - 170.0, W - 150.0, s.color);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="12">{}</text>"#, W - 144.0, ly + 4.0, escape(&s.label));
    }
    out += "</svg>\n";
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
