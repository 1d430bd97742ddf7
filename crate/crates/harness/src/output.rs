//! CSV, JSON and SVG artifacts. File names embed the config hash so reruns of
//! the same configuration overwrite their own outputs and nothing else.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::error::{HarnessError, Result};

/// Everything needed to rerun a command bit-exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub code_version: String,
    pub config: RunConfig,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Self {
            command: command.into(),
            config_hash: config.hash(),
            seed: config.seed,
            code_version: env!("CARGO_PKG_VERSION").into(),
            config: config.identity(),
        }
    }
}

/// Writes the artifacts of one command run.
#[derive(Debug, Clone)]
pub struct Emitter {
    dir: PathBuf,
    hash: String,
    formats: Vec<Format>,
    written: Vec<PathBuf>,
}

impl Emitter {
    pub fn new(config: &RunConfig) -> Result<Self> {
        let dir = config.output.dir.clone();
        fs::create_dir_all(&dir).map_err(|source| HarnessError::Output { path: dir.clone(), source })?;
        Ok(Self { dir, hash: config.short_hash(), formats: config.output.formats.clone(), written: Vec::new() })
    }

    pub fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{stem}_{}.{ext}", self.hash))
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn write(&mut self, path: PathBuf, bytes: &[u8]) -> Result<()> {
        fs::write(&path, bytes).map_err(|source| HarnessError::Output { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv<R: Serialize>(&mut self, stem: &str, rows: &[R]) -> Result<()> {
        if !self.formats.contains(&Format::Csv) {
            return Ok(());
        }
        let path = self.path(stem, "csv");
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| csv_error(&path, e))?;
        }
        let bytes = w.into_inner().map_err(|e| csv_error(&path, e.into_error().into()))?;
        self.write(path, &bytes)
    }

    pub fn json<T: Serialize>(&mut self, stem: &str, value: &T) -> Result<()> {
        if !self.formats.contains(&Format::Json) {
            return Ok(());
        }
        let path = self.path(stem, "json");
        let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
        bytes.push(b'\n');
        self.write(path, &bytes)
    }

    pub fn svg(&mut self, stem: &str, plot: &LinePlot) -> Result<()> {
        if !self.formats.contains(&Format::Svg) {
            return Ok(());
        }
        let path = self.path(stem, "svg");
        let text = plot.render();
        self.write(path, text.as_bytes())
    }
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    HarnessError::Output { path: path.into(), source: std::io::Error::other(e.to_string()) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub colour: &'static str,
    pub width: f64,
}

/// Minimal standalone line plot.
#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

impl LinePlot {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        let pts = self.series.iter().flat_map(|s| s.points.iter()).filter(|p| p.0.is_finite() && p.1.is_finite());
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY);
        for &(x, y) in pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if !x0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
        (x0, x1, y0, y1)
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * (W - LEFT - RIGHT);
        let sy = |y: f64| H - BOTTOM - (y - y0) / (y1 - y0) * (H - TOP - BOTTOM);
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(&self.title));
        let (bx, by) = (sx(x0), sy(y0));
        let _ = writeln!(
            s,
            r#"<path d="M{LEFT} {TOP} L{LEFT} {by} L{} {by}" fill="none" stroke="black"/>"#,
            W - RIGHT
        );
        for k in 0..=4 {
            let fx = x0 + (x1 - x0) * k as f64 / 4.0;
            let fy = y0 + (y1 - y0) * k as f64 / 4.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
                sx(fx),
                by + 18.0,
                tick(fx)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
                bx - 6.0,
                sy(fy) + 4.0,
                tick(fy)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            (LEFT + W - RIGHT) / 2.0,
            H - 16.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
            (TOP + H - BOTTOM) / 2.0,
            (TOP + H - BOTTOM) / 2.0,
            escape(&self.y_label)
        );
        for (n, ser) in self.series.iter().enumerate() {
            let pts: Vec<String> = ser
                .points
                .iter()
                .filter(|p| p.0.is_finite() && p.1.is_finite())
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
                pts.join(" "),
                ser.colour,
                ser.width
            );
            let ly = TOP + 16.0 * n as f64 + 8.0;
            let lx = W - RIGHT - 170.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="{}"/>"#,
                lx + 20.0,
                ser.colour,
                ser.width
            );
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&ser.label));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_balanced_tags() {
        let p = LinePlot {
            title: "a < b & c".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series { label: "s".into(), points: vec![(0.0, 1.0), (1.0, 0.5)], colour: "black", width: 1.0 }],
        };
        let svg = p.render();
        assert!(svg.contains("a &lt; b &amp; c"));
        assert_eq!(svg.matches("<svg").count(), svg.matches("</svg>").count());
    }

    #[test]
    fn ticks() {
        assert_eq!(tick(0.0), "0");
        assert_eq!(tick(1.2e-3), "1.2e-3");
        assert_eq!(tick(2500.0), "2500.000");
    }
}
