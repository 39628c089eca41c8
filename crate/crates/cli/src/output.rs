//! CSV and manifest writers.
//!
//! Numbers are written with Rust's shortest round-trip float formatting, so
//! identical inputs always produce byte-identical files and no precision is
//! lost on the way back in.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// One figure/sweep cell.
#[derive(Clone, Copy)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(&'static str),
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) => write!(f, "{s}"),
        }
    }
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<Cell>]) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Everything needed to re-run a figure bit-identically.
#[derive(Serialize, Deserialize, Clone)]
pub struct Manifest {
    pub command: String,
    pub figure: String,
    pub flags: ManifestFlags,
    pub seed: u64,
    pub versions: Versions,
    pub emitted_files: Vec<String>,
    /// Markers dropped by the starvation rule, with the reason.
    pub skipped_markers: Vec<SkippedMarker>,
}

#[derive(Serialize, Deserialize, Clone)]
pub struct ManifestFlags {
    pub grid: String,
    pub rate: f64,
    pub mc_samples: usize,
    pub anchors: Option<Vec<f64>>,
}

#[derive(Serialize, Deserialize, Clone)]
pub struct Versions {
    #[serde(rename = "odo-kit")]
    pub odo_kit: String,
    #[serde(rename = "odo-core")]
    pub odo_core: String,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            odo_kit: env!("CARGO_PKG_VERSION").to_string(),
            odo_core: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Serialize, Deserialize, Clone)]
pub struct SkippedMarker {
    pub file: String,
    pub omega0_db: f64,
    pub reason: String,
}

pub fn write_manifest(path: &Path, manifest: &Manifest) -> Result<(), CliError> {
    let mut out = BufWriter::new(File::create(path)?);
    let json = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Usage(format!("manifest serialization failed: {e}")))?;
    writeln!(out, "{json}")?;
    out.flush()?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Manifest, CliError> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("cannot parse manifest {}: {e}", path.display())))
}
