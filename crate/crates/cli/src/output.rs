//! File emission: CSV with `#`-prefixed metadata headers, or a JSON mirror
//! with the parameters echoed verbatim. UTF-8, LF line endings, full
//! round-trip float precision in both formats.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use qmeasure::monte_carlo::Histogram;
use qmeasure::quad::Peak;

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Ordered parameter echo carried in every output file.
#[derive(Debug, Clone, Default)]
pub struct Meta {
    pub command: String,
    pub params: Vec<(String, String)>,
}

impl Meta {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            params: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.params.push((key.to_string(), value.to_string()));
    }

    fn csv_header(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# qmeasure {VERSION}");
        let _ = writeln!(out, "# command: {}", self.command);
        for (k, v) in &self.params {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out
    }

    fn json_params(&self) -> serde_json::Map<String, serde_json::Value> {
        let mut map = serde_json::Map::new();
        for (k, v) in &self.params {
            let value = v
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map(serde_json::Value::Number)
                .unwrap_or_else(|| serde_json::Value::String(v.clone()));
            map.insert(k.clone(), value);
        }
        map
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() && !parent.exists() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        }
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

/// Sidecar path: `figure1.csv` -> `figure1.peaks.csv`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("csv");
    path.with_file_name(format!("{stem}.peaks.{ext}"))
}

#[derive(Serialize)]
struct DensityDoc<'a> {
    version: &'static str,
    command: &'a str,
    parameters: serde_json::Map<String, serde_json::Value>,
    grid: &'a [f64],
    density: &'a [f64],
    peaks: Vec<PeakDoc>,
}

#[derive(Serialize)]
struct PeakDoc {
    location: f64,
    height: f64,
}

#[derive(Serialize)]
struct PeaksDoc<'a> {
    version: &'static str,
    source: &'a str,
    peaks: Vec<PeakDoc>,
}

/// Write a density grid plus its peak-report sidecar.
pub fn write_density(
    path: &Path,
    format: Format,
    meta: &Meta,
    grid: &[f64],
    density: &[f64],
    peaks: &[Peak],
) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut out = meta.csv_header();
            out.push_str("x,density\n");
            for (x, d) in grid.iter().zip(density.iter()) {
                let _ = writeln!(out, "{x},{d}");
            }
            write_file(path, &out)?;

            let mut side = String::new();
            let _ = writeln!(side, "# qmeasure {VERSION}");
            let _ = writeln!(side, "# source: {}", meta.command);
            side.push_str("peak_location,peak_height\n");
            for p in peaks {
                let _ = writeln!(side, "{},{}", p.location, p.height);
            }
            write_file(&sidecar_path(path), &side)
        }
        Format::Json => {
            let doc = DensityDoc {
                version: VERSION,
                command: &meta.command,
                parameters: meta.json_params(),
                grid,
                density,
                peaks: peaks
                    .iter()
                    .map(|p| PeakDoc {
                        location: p.location,
                        height: p.height,
                    })
                    .collect(),
            };
            write_file(path, &pretty(&doc)?)?;
            let side = PeaksDoc {
                version: VERSION,
                source: &meta.command,
                peaks: peaks
                    .iter()
                    .map(|p| PeakDoc {
                        location: p.location,
                        height: p.height,
                    })
                    .collect(),
            };
            write_file(&sidecar_path(path), &pretty(&side)?)
        }
    }
}

#[derive(Serialize)]
struct SamplesDoc<'a> {
    version: &'static str,
    command: &'a str,
    parameters: serde_json::Map<String, serde_json::Value>,
    samples: &'a [f64],
}

pub fn write_samples(
    path: &Path,
    format: Format,
    meta: &Meta,
    samples: &[f64],
) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut out = meta.csv_header();
            out.push_str("sample\n");
            for s in samples {
                let _ = writeln!(out, "{s}");
            }
            write_file(path, &out)
        }
        Format::Json => {
            let doc = SamplesDoc {
                version: VERSION,
                command: &meta.command,
                parameters: meta.json_params(),
                samples,
            };
            write_file(path, &pretty(&doc)?)
        }
    }
}

#[derive(Serialize)]
struct HistogramDoc<'a> {
    version: &'static str,
    command: &'a str,
    parameters: serde_json::Map<String, serde_json::Value>,
    edges: &'a [f64],
    counts: &'a [u64],
    total: u64,
    density: Vec<f64>,
}

pub fn write_histogram(
    path: &Path,
    format: Format,
    meta: &Meta,
    hist: &Histogram,
) -> Result<(), CliError> {
    match format {
        Format::Csv => {
            let mut out = meta.csv_header();
            out.push_str("bin_lo,bin_hi,count,density\n");
            let density = hist.density();
            for (i, d) in density.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    hist.edges[i],
                    hist.edges[i + 1],
                    hist.counts[i],
                    d
                );
            }
            write_file(path, &out)
        }
        Format::Json => {
            let doc = HistogramDoc {
                version: VERSION,
                command: &meta.command,
                parameters: meta.json_params(),
                edges: &hist.edges,
                counts: &hist.counts,
                total: hist.total,
                density: hist.density(),
            };
            write_file(path, &pretty(&doc)?)
        }
    }
}

fn pretty<T: Serialize>(doc: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(doc).expect("serialization cannot fail");
    s.push('\n');
    Ok(s)
}
