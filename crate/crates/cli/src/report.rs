//! Machine-readable reports: a versioned JSON document and a per-level CSV.
//!
//! Every float is written with 17 significant digits, so a report re-parses to
//! bit-identical values. Files are written once, through a temporary file in
//! the target directory that is renamed into place.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use infsup_core::pipeline::{ConvergenceSeries, LevelRecord};
use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::Formatter;
use thiserror::Error;

use crate::config::ResolvedConfig;
use crate::selftest::SelftestSummary;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fixed CSV column order.
pub const CSV_HEADER: &str =
    "level,h,dofs,C_h,beta_squared,gamma_identity,gamma_direct,identity_deviation,lbb_beta_squared,b0,b1,b2,seconds";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write report {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("malformed report {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Which way a [`Check`] bound points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    AtMost,
    AtLeast,
}

/// A named threshold test on one reported value.
#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub threshold: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: &str, value: f64, bound: Bound, threshold: f64) -> Self {
        let passed = match bound {
            Bound::AtMost => value <= threshold,
            Bound::AtLeast => value >= threshold,
        };
        Self {
            name: name.to_string(),
            value,
            bound,
            threshold,
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, serde::Serialize, Deserialize)]
pub struct Summary {
    /// All checks passed and no level failed.
    pub passed: bool,
    pub failed_levels: Vec<usize>,
    pub max_identity_deviation: Option<f64>,
    pub convergence: Option<ConvergenceSeries>,
    pub holomorphic_gamma: Option<f64>,
    pub selftest: Option<SelftestSummary>,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: ResolvedConfig,
    pub levels: Vec<LevelRecord>,
    pub summary: Summary,
}

impl ReportDocument {
    pub fn new(config: ResolvedConfig, levels: Vec<LevelRecord>, mut summary: Summary) -> Self {
        summary.failed_levels = levels.iter().filter(|r| r.error.is_some()).map(|r| r.level).collect();
        summary.passed = summary.failed_levels.is_empty() && summary.checks.iter().all(|c| c.passed);
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            config,
            levels,
            summary,
        }
    }
}

/// `serde_json` formatter printing floats as `d.dddddddddddddddde±x`.
struct SignificantDigits;

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// A finite float with 17 significant digits.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn to_json_string(doc: &ReportDocument) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SignificantDigits);
    doc.serialize(&mut ser).expect("report values serialize");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

pub fn from_json_str(text: &str) -> Result<ReportDocument, serde_json::Error> {
    serde_json::from_str(text)
}

fn opt(value: Option<f64>) -> String {
    value.map(format_f64).unwrap_or_default()
}

pub fn to_csv_string(doc: &ReportDocument) -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(CSV_HEADER.split(',')).expect("in-memory write");
    for r in &doc.levels {
        let b = |k: usize| r.betti.get(k).map(|b| b.to_string()).unwrap_or_default();
        w.write_record([
            r.level.to_string(),
            format_f64(r.h),
            r.dofs.to_string(),
            opt(r.c_h),
            opt(r.beta_squared),
            opt(r.gamma_identity),
            opt(r.gamma_direct),
            opt(r.identity_deviation),
            opt(r.lbb_beta_squared),
            b(0),
            b(1),
            b(2),
            opt(r.seconds),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv writes UTF-8")
}

/// Writes `contents` to `path` atomically.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), ReportError> {
    let io_err = |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn write_report(doc: &ReportDocument, path: &Path, format: ReportFormat) -> Result<(), ReportError> {
    let text = match format {
        ReportFormat::Json => to_json_string(doc),
        ReportFormat::Csv => to_csv_string(doc),
    };
    write_atomic(path, &text)
}

pub fn read_report(path: &Path) -> Result<ReportDocument, ReportError> {
    let text = std::fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    from_json_str(&text).map_err(|e| ReportError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
