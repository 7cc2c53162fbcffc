//! Artifact formatting: CSV tables, polyline SVG plots and the manifest.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// One file produced by an experiment, held in memory until written.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self {
            name: name.into(),
            bytes,
        }
    }

    pub fn text(name: impl Into<String>, text: String) -> Self {
        Self::new(name, text.into_bytes())
    }
}

/// Builds a CSV table. Floats use Rust's shortest round-trip formatting,
/// which never depends on locale.
#[derive(Debug, Clone)]
pub struct Csv {
    out: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut out = header.join(",");
        out.push('\n');
        Self {
            out,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.columns);
        let cells: Vec<String> = values.iter().map(|&v| format_float(v)).collect();
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

/// Plain decimal for ordinary magnitudes, exponent form for very small
/// or large ones. Both are locale-free and parse back exactly.
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<Series>,
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            series: Vec::new(),
        }
    }

    pub fn log_x(mut self) -> Self {
        self.log_x = true;
        self
    }

    pub fn with(mut self, s: Series) -> Self {
        self.series.push(s);
        self
    }

    /// Minimal SVG: frame, axis extremes, one polyline per series and a
    /// legend. Non-finite points are skipped.
    pub fn render(&self) -> String {
        let (w, h) = (640.0, 400.0);
        let (left, right, top, bottom) = (70.0, 20.0, 40.0, 50.0);
        let fx = |x: f64| if self.log_x { x.log10() } else { x };
        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|&(x, y)| (fx(x), y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .collect();
        let span = |v: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        let (x0, x1) = span(&mut pts.iter().map(|p| p.0));
        let (y0, y1) = span(&mut pts.iter().map(|p| p.1));
        let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
        let py = |y: f64| h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom);

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
        );
        let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            w - left - right,
            h - top - bottom
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" font-size="16" text-anchor="middle">{}</text>"#,
            w / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{}</text>"#,
            w / 2.0,
            h - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="16" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            h / 2.0,
            h / 2.0,
            escape(&self.y_label)
        );
        let unfx = |x: f64| if self.log_x { 10f64.powf(x) } else { x };
        for (x, anchor) in [(x0, "start"), (x1, "end")] {
            let _ = writeln!(
                svg,
                r#"<text x="{:.1}" y="{}" font-size="10" text-anchor="{anchor}">{}</text>"#,
                px(x),
                h - bottom + 14.0,
                short(unfx(x))
            );
        }
        for y in [y0, y1] {
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{:.1}" font-size="10" text-anchor="end">{}</text>"#,
                left - 4.0,
                py(y) + 3.0,
                short(y)
            );
        }
        for (k, s) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let coords: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| (fx(x), y))
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
                .collect();
            let _ = writeln!(
                svg,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
                coords.join(" ")
            );
            let ly = top + 14.0 + 14.0 * k as f64;
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{ly}" font-size="11" fill="{color}">{}</text>"#,
                left + 8.0,
                escape(&s.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn short(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e5) {
        format!("{v:.3e}")
    } else {
        format!("{:.4}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: String,
    pub version: String,
    pub files: Vec<ManifestEntry>,
    pub warnings: Vec<String>,
    /// Fully resolved configuration, defaults included.
    pub config: toml::Table,
}

pub const MANIFEST_NAME: &str = "manifest.toml";
pub const WARNINGS_NAME: &str = "warnings.txt";

/// Writes the artifacts, the warnings file when there are warnings, and
/// finally the manifest.
pub fn write_all(
    dir: &Path,
    experiment: &str,
    artifacts: &[Artifact],
    warnings: &[String],
    config: &crate::config::Config,
) -> std::io::Result<Manifest> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::with_capacity(artifacts.len() + 1);
    let mut all: Vec<Artifact> = artifacts.to_vec();
    if !warnings.is_empty() {
        let mut text = warnings.join("\n");
        text.push('\n');
        all.push(Artifact::text(WARNINGS_NAME, text));
    }
    for a in &all {
        std::fs::write(dir.join(&a.name), &a.bytes)?;
        files.push(ManifestEntry {
            name: a.name.clone(),
            bytes: a.bytes.len(),
            sha256: sha256_hex(&a.bytes),
        });
    }
    let manifest = Manifest {
        experiment: experiment.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        files,
        warnings: warnings.to_vec(),
        config: toml::Table::try_from(config).map_err(std::io::Error::other)?,
    };
    let text = toml::to_string(&manifest).map_err(std::io::Error::other)?;
    std::fs::write(dir.join(MANIFEST_NAME), text)?;
    Ok(manifest)
}
