//! Binary per-video feature files and their text label companions.
//!
//! Feature layout (all integers and floats little-endian):
//! 6-byte magic `ARSTF1`, `u32` frame count `T`, `u32` feature width
//! `d_feat`, then `T * d_feat` 32-bit floats row-major. The byte length is
//! exactly `14 + 4 * T * d_feat`; anything shorter or longer is rejected.
//! Labels are one 1-based integer phase id per line, `T` lines.

use std::io::Write;
use std::path::Path;

use crate::error::{ArstError, Result};
use crate::numerics::Matrix;

pub const FEATURE_MAGIC: &[u8; 6] = b"ARSTF1";

fn format_err(path: &Path, reason: impl Into<String>) -> ArstError {
    ArstError::Format {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Writes one video's features.
pub fn write_feature_file(path: &Path, features: &Matrix<f32>) -> Result<()> {
    let (rows, cols) = features.shape();
    if rows == 0 || cols == 0 {
        return Err(format_err(path, "refusing to write an empty feature matrix"));
    }
    let mut buf = Vec::with_capacity(14 + 4 * rows * cols);
    buf.extend_from_slice(FEATURE_MAGIC);
    buf.extend_from_slice(&(rows as u32).to_le_bytes());
    buf.extend_from_slice(&(cols as u32).to_le_bytes());
    for &v in features.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = std::fs::File::create(path)
        .map_err(|e| format_err(path, format!("cannot create: {e}")))?;
    file.write_all(&buf)
        .map_err(|e| format_err(path, format!("cannot write: {e}")))?;
    Ok(())
}

/// Reads one video's features, enforcing the exact-length invariant.
pub fn read_feature_file(path: &Path) -> Result<Matrix<f32>> {
    let bytes =
        std::fs::read(path).map_err(|e| format_err(path, format!("cannot read: {e}")))?;
    if bytes.len() < 14 {
        return Err(format_err(
            path,
            format!("{} bytes is shorter than the 14-byte header", bytes.len()),
        ));
    }
    if &bytes[..6] != FEATURE_MAGIC {
        return Err(format_err(path, "bad magic: not a feature file"));
    }
    let rows = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
    if rows == 0 || cols == 0 {
        return Err(format_err(path, "header declares an empty matrix"));
    }
    let expect = 14 + 4 * rows * cols;
    if bytes.len() != expect {
        return Err(format_err(
            path,
            format!(
                "length {} does not match header ({rows} x {cols} needs {expect})",
                bytes.len()
            ),
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for chunk in bytes[14..].chunks_exact(4) {
        data.push(f32::from_le_bytes(chunk.try_into().unwrap()));
    }
    Matrix::from_vec(rows, cols, data)
}

/// Writes labels as one phase id per line.
pub fn write_labels_file(path: &Path, labels: &[u32]) -> Result<()> {
    if labels.is_empty() {
        return Err(format_err(path, "refusing to write empty labels"));
    }
    let mut text = String::with_capacity(labels.len() * 2);
    for &l in labels {
        text.push_str(&l.to_string());
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|e| format_err(path, format!("cannot write: {e}")))
}

/// Reads a labels file; phase ids must be positive integers.
pub fn read_labels_file(path: &Path) -> Result<Vec<u32>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format_err(path, format!("cannot read: {e}")))?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let id: u32 = line
            .parse()
            .map_err(|_| format_err(path, format!("line {}: '{line}' is not a phase id", i + 1)))?;
        if id == 0 {
            return Err(format_err(path, format!("line {}: phase ids are 1-based", i + 1)));
        }
        labels.push(id);
    }
    if labels.is_empty() {
        return Err(format_err(path, "no labels found"));
    }
    Ok(labels)
}
