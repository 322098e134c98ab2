//! Per-frame prediction CSV.
//!
//! Header `frame_index,committed_phase,p1,...,pc`, then one row per frame
//! with a 1-based frame index, the committed phase id, and the class
//! probabilities for that frame. Floats are written in shortest
//! round-trip form, so reading a file back restores exact values and
//! writing the same predictions twice yields identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{ArstError, Result};
use crate::numerics::Matrix;

/// Contents of a prediction CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionFile {
    /// Committed phase id per frame (1-based ids).
    pub committed: Vec<u32>,
    /// `T x classes` probability rows.
    pub probs: Matrix<f32>,
}

fn format_err(path: &Path, reason: impl Into<String>) -> ArstError {
    ArstError::Format {
        path: path.display().to_string(),
        reason: reason.into(),
    }
}

/// Renders the CSV text for committed phases plus their probability rows.
pub fn render_predictions(committed: &[u32], probs: &Matrix<f32>) -> Result<String> {
    if committed.is_empty() {
        return Err(ArstError::Invariant(
            "cannot render an empty prediction sequence".into(),
        ));
    }
    if committed.len() != probs.rows() {
        return Err(ArstError::shape(
            "render_predictions",
            (committed.len(), 1),
            probs.shape(),
        ));
    }
    let classes = probs.cols();
    let mut out = String::new();
    out.push_str("frame_index,committed_phase");
    for c in 1..=classes {
        let _ = write!(out, ",p{c}");
    }
    out.push('\n');
    for (t, &phase) in committed.iter().enumerate() {
        if phase == 0 || phase as usize > classes {
            return Err(ArstError::PhaseId {
                id: phase,
                classes: classes as u32,
            });
        }
        let _ = write!(out, "{},{}", t + 1, phase);
        for &p in probs.row(t) {
            let _ = write!(out, ",{p}");
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes a prediction CSV to disk.
pub fn write_predictions(path: &Path, committed: &[u32], probs: &Matrix<f32>) -> Result<()> {
    let text = render_predictions(committed, probs)?;
    std::fs::write(path, text).map_err(|e| format_err(path, format!("cannot write: {e}")))
}

/// Reads a prediction CSV, validating the header, sequential 1-based
/// frame indices, phase ids, and column counts.
pub fn read_predictions(path: &Path) -> Result<PredictionFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format_err(path, format!("cannot read: {e}")))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| format_err(path, "empty file"))?;
    let fields: Vec<&str> = header.split(',').collect();
    if fields.len() < 3 || fields[0] != "frame_index" || fields[1] != "committed_phase" {
        return Err(format_err(path, format!("unexpected header: {header}")));
    }
    let classes = fields.len() - 2;
    for (c, &name) in fields[2..].iter().enumerate() {
        if name != format!("p{}", c + 1) {
            return Err(format_err(
                path,
                format!("probability column {} is named {name}", c + 1),
            ));
        }
    }

    let mut committed = Vec::new();
    let mut prob_data: Vec<f32> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let row = lineno + 2; // 1-based line number in the file
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != classes + 2 {
            return Err(format_err(
                path,
                format!("line {row}: expected {} cells, got {}", classes + 2, cells.len()),
            ));
        }
        let idx: usize = cells[0]
            .parse()
            .map_err(|_| format_err(path, format!("line {row}: bad frame index {}", cells[0])))?;
        if idx != committed.len() + 1 {
            return Err(format_err(
                path,
                format!("line {row}: frame index {idx} out of order"),
            ));
        }
        let phase: u32 = cells[1]
            .parse()
            .map_err(|_| format_err(path, format!("line {row}: bad phase {}", cells[1])))?;
        if phase == 0 || phase as usize > classes {
            return Err(ArstError::PhaseId {
                id: phase,
                classes: classes as u32,
            });
        }
        committed.push(phase);
        for &cell in &cells[2..] {
            let p: f32 = cell
                .parse()
                .map_err(|_| format_err(path, format!("line {row}: bad probability {cell}")))?;
            prob_data.push(p);
        }
    }
    if committed.is_empty() {
        return Err(format_err(path, "no prediction rows"));
    }
    let probs = Matrix::from_vec(committed.len(), classes, prob_data)?;
    Ok(PredictionFile { committed, probs })
}
