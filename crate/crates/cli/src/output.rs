//! Hashing, number formatting and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::error::{io_err, CliError, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the compact JSON form with object keys sorted, so that the value
/// and not its layout is hashed.
pub fn canonical_hash<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(sha256_hex(v.to_string().as_bytes()))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Write through a temporary file in the target directory, then rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(io_err(dir))?;
    tmp.write_all(contents.as_bytes()).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e.error })?;
    Ok(())
}

/// To `path` when given, otherwise to standard output.
pub fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, contents),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(contents.as_bytes()).map_err(io_err("<stdout>"))?;
            Ok(())
        }
    }
}

/// Twelve significant digits in scientific notation.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.11e}")
    }
}

/// Floats rounded to twelve significant digits, for JSON fields that should
/// not depend on the last few bits.
pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        sig12(x).parse().unwrap_or(x)
    } else {
        x
    }
}

/// Word-ball budget: the library default, capped by `ANOSOV_MAX_BUDGET`.
pub fn budget() -> Result<u64> {
    let default = dod_core::anosov::DEFAULT_BUDGET;
    match std::env::var("ANOSOV_MAX_BUDGET") {
        Ok(v) => {
            let cap: u64 = v
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("ANOSOV_MAX_BUDGET={v:?} is not a non-negative integer")))?;
            Ok(default.min(cap))
        }
        Err(_) => Ok(default),
    }
}
