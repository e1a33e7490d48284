//! CSV and JSON emission with stable formatting.
//!
//! Floats use Rust's shortest round-trip representation, so every value is
//! written at full double precision. JSON objects have sorted keys.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{HermiteError, Result};

/// Lower-case hex SHA-256.
pub fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in hash.iter() {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Pretty JSON with keys sorted at every level and a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| HermiteError::Numerical(format!("serialization failed: {e}")))?;
    let mut s =
        serde_json::to_string_pretty(&v).map_err(|e| HermiteError::Numerical(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// CSV with the given header and numeric rows.
pub fn csv_table(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

/// Named `(x, y)` series for plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Long-format `series,x,y` CSV; `None` when there is nothing to write.
pub fn long_format(series: &[Series]) -> Option<String> {
    if series.iter().all(|s| s.points.is_empty()) {
        return None;
    }
    let mut out = String::from("series,x,y\n");
    for s in series {
        for (x, y) in &s.points {
            let _ = writeln!(out, "{},{x},{y}", s.name);
        }
    }
    Some(out)
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)
        .map_err(|e| HermiteError::InvalidInput(format!("cannot create output directory {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| HermiteError::InvalidInput(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
