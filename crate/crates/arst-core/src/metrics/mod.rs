//! Frame-level evaluation: per-video accuracy, per-phase
//! precision/recall/Jaccard averaged over the phases present in the
//! ground truth, cross-video mean/std aggregation, and transition-count
//! diagnostics.

mod ribbon;

pub use ribbon::{export_ribbon, ribbon_svg};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ArstError, Result};

/// Precision, recall, and Jaccard index of one phase within one video.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseMetrics {
    pub precision: f64,
    pub recall: f64,
    pub jaccard: f64,
}

/// Metrics of a single video.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VideoEval {
    pub frames: usize,
    /// Fraction of frames whose predicted phase equals the ground truth.
    pub accuracy: f64,
    /// Per-phase metrics, keyed by phase id, for phases present in the
    /// ground truth. Phases that are only predicted contribute false
    /// positives to their class but are excluded here and from averages.
    pub per_phase: BTreeMap<u32, PhaseMetrics>,
    pub avg_precision: f64,
    pub avg_recall: f64,
    pub avg_jaccard: f64,
    /// Number of indices where the predicted label changes.
    pub pred_transitions: usize,
    /// Number of indices where the ground-truth label changes.
    pub gt_transitions: usize,
}

impl VideoEval {
    /// Predicted transitions in excess of the ground truth, floored at 0.
    /// A noisy predictor blips often, so this counts over-segmentation.
    pub fn excess_transitions(&self) -> usize {
        self.pred_transitions.saturating_sub(self.gt_transitions)
    }
}

/// Number of indices where the label changes.
pub fn transition_count(labels: &[u32]) -> usize {
    labels.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Evaluates one video.
///
/// Zero-denominator conventions: a ground-truth phase that is never
/// predicted has precision 0 (and recall/Jaccard 0 follow from counts).
pub fn eval_video(pred: &[u32], gt: &[u32]) -> Result<VideoEval> {
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

    let frames = gt.len();
    let mut correct = 0usize;
    // tp/fp/fn counts per phase id, over phases seen anywhere.
    let mut counts: BTreeMap<u32, (usize, usize, usize)> = BTreeMap::new();
    for (&p, &g) in pred.iter().zip(gt.iter()) {
        if p == g {
            correct += 1;
            counts.entry(g).or_default().0 += 1;
        } else {
            counts.entry(p).or_default().1 += 1;
            counts.entry(g).or_default().2 += 1;
        }
    }

    let mut per_phase = BTreeMap::new();
    let (mut sum_p, mut sum_r, mut sum_j) = (0.0, 0.0, 0.0);
    for (&phase, &(tp, fp, fn_)) in &counts {
        if tp + fn_ == 0 {
            continue; // not present in the ground truth
        }
        let precision = if tp + fp == 0 {
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = tp as f64 / (tp + fn_) as f64;
        let jaccard = tp as f64 / (tp + fp + fn_) as f64;
        per_phase.insert(
            phase,
            PhaseMetrics {
                precision,
                recall,
                jaccard,
            },
        );
        sum_p += precision;
        sum_r += recall;
        sum_j += jaccard;
    }
    let existing = per_phase.len() as f64;

    Ok(VideoEval {
        frames,
        accuracy: correct as f64 / frames as f64,
        per_phase,
        avg_precision: sum_p / existing,
        avg_recall: sum_r / existing,
        avg_jaccard: sum_j / existing,
        pred_transitions: transition_count(pred),
        gt_transitions: transition_count(gt),
    })
}

/// Mean and population standard deviation of one metric across videos.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub std: f64,
}

fn summarize(values: impl Iterator<Item = f64> + Clone) -> MetricSummary {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    MetricSummary {
        mean,
        std: var.sqrt(),
    }
}

/// Cross-video aggregation (unweighted across videos).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Aggregate {
    pub videos: usize,
    pub accuracy: MetricSummary,
    pub precision: MetricSummary,
    pub recall: MetricSummary,
    pub jaccard: MetricSummary,
    pub mean_excess_transitions: f64,
}

/// Aggregates per-video metrics with population standard deviations.
pub fn aggregate(evals: &[VideoEval]) -> Result<Aggregate> {
    if evals.is_empty() {
        return Err(ArstError::Invariant("no videos to aggregate".into()));
    }
    Ok(Aggregate {
        videos: evals.len(),
        accuracy: summarize(evals.iter().map(|e| e.accuracy)),
        precision: summarize(evals.iter().map(|e| e.avg_precision)),
        recall: summarize(evals.iter().map(|e| e.avg_recall)),
        jaccard: summarize(evals.iter().map(|e| e.avg_jaccard)),
        mean_excess_transitions: evals
            .iter()
            .map(|e| e.excess_transitions() as f64)
            .sum::<f64>()
            / evals.len() as f64,
    })
}
