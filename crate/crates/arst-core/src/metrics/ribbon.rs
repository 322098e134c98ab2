//! Phase ribbon export: a two-row vector graphic with the ground truth
//! above and the prediction below, one colored rectangle per contiguous
//! phase segment. Output bytes are deterministic for identical inputs.

use std::path::Path;

use crate::error::{ArstError, Result};

/// Fixed phase palette; phase id `k` uses entry `(k - 1) mod len`.
const PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b4", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

const ROW_HEIGHT: usize = 24;
const ROW_GAP: usize = 6;

fn phase_color(phase: u32) -> &'static str {
    PALETTE[(phase as usize - 1) % PALETTE.len()]
}

/// Appends one row of segment rectangles at vertical offset `y`.
fn push_row(svg: &mut String, labels: &[u32], y: usize) {
    let mut start = 0usize;
    for end in 1..=labels.len() {
        if end == labels.len() || labels[end] != labels[start] {
            svg.push_str(&format!(
                "<rect x=\"{start}\" y=\"{y}\" width=\"{}\" height=\"{ROW_HEIGHT}\" fill=\"{}\"/>\n",
                end - start,
                phase_color(labels[start]),
            ));
            start = end;
        }
    }
}

/// Renders the two-row ribbon as a self-contained vector graphic.
pub fn ribbon_svg(pred: &[u32], gt: &[u32]) -> Result<String> {
    if pred.len() != gt.len() {
        return Err(ArstError::LengthMismatch {
            pred: pred.len(),
            gt: gt.len(),
        });
    }
    if gt.is_empty() {
        return Err(ArstError::Invariant("empty label sequences".into()));
    }
    for &l in pred.iter().chain(gt.iter()) {
        if l == 0 {
            return Err(ArstError::PhaseId {
                id: 0,
                classes: u32::MAX,
            });
        }
    }
    let width = gt.len();
    let height = 2 * ROW_HEIGHT + ROW_GAP;
    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {width} {height}\" \
         width=\"{width}\" height=\"{height}\" shape-rendering=\"crispEdges\">\n"
    ));
    push_row(&mut svg, gt, 0);
    push_row(&mut svg, pred, ROW_HEIGHT + ROW_GAP);
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Writes the ribbon for `pred` against `gt` to `path`.
pub fn export_ribbon(pred: &[u32], gt: &[u32], path: &Path) -> Result<()> {
    let svg = ribbon_svg(pred, gt)?;
    std::fs::write(path, svg).map_err(|e| ArstError::Format {
        path: path.display().to_string(),
        reason: format!("cannot write ribbon: {e}"),
    })
}
