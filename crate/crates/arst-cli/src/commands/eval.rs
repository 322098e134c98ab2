//! Evaluation command.

use std::path::{Path, PathBuf};

use arst_core::formats::{read_labels_file, read_predictions};
use arst_core::metrics::{aggregate, eval_video, export_ribbon, Aggregate, VideoEval};
use arst_core::{ArstError, Result};
use serde::Serialize;

/// One evaluated video in the report.
#[derive(Debug, Serialize)]
pub struct ReportVideo {
    pub id: String,
    #[serde(flatten)]
    pub eval: VideoEval,
}

/// Full evaluation report: per-video metrics plus their aggregate.
#[derive(Debug, Serialize)]
pub struct EvalReport {
    pub videos: Vec<ReportVideo>,
    pub aggregate: Aggregate,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

/// Pairs of (id, prediction CSV, label file) to evaluate.
fn collect_pairs(pred: &Path, gt: &Path) -> Result<Vec<(String, PathBuf, PathBuf)>> {
    match (pred.is_dir(), gt.is_dir()) {
        (false, false) => Ok(vec![(stem(pred), pred.to_path_buf(), gt.to_path_buf())]),
        (true, true) => {
            let mut csvs: Vec<PathBuf> = std::fs::read_dir(pred)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            csvs.sort();
            if csvs.is_empty() {
                return Err(ArstError::Format {
                    path: pred.display().to_string(),
                    reason: "directory contains no .csv predictions".into(),
                });
            }
            csvs.into_iter()
                .map(|p| {
                    let id = stem(&p);
                    let labels = gt.join(format!("{id}.labels"));
                    if !labels.is_file() {
                        return Err(ArstError::Format {
                            path: labels.display().to_string(),
                            reason: format!("no ground-truth labels for prediction {id}"),
                        });
                    }
                    Ok((id, p, labels))
                })
                .collect()
        }
        _ => Err(ArstError::Config(
            "pred and gt must both be files or both be directories".into(),
        )),
    }
}

/// Evaluates predictions against ground truth. File arguments compare one
/// video; directory arguments pair every `<id>.csv` under `pred` with
/// `<id>.labels` under `gt`. The optional report path receives the JSON
/// report; the optional ribbon path receives a two-row timeline SVG and
/// is only available when comparing single files.
pub fn cmd_eval(
    pred: &Path,
    gt: &Path,
    report: Option<&Path>,
    ribbon: Option<&Path>,
) -> Result<EvalReport> {
    let pairs = collect_pairs(pred, gt)?;
    if ribbon.is_some() && pairs.len() != 1 {
        return Err(ArstError::Config(
            "--ribbon needs a single prediction file, not a directory".into(),
        ));
    }

    let mut videos = Vec::with_capacity(pairs.len());
    for (id, pred_path, gt_path) in &pairs {
        let prediction = read_predictions(pred_path)?;
        let labels = read_labels_file(gt_path)?;
        let eval = eval_video(&prediction.committed, &labels)?;
        if let Some(ribbon_path) = ribbon {
            export_ribbon(&prediction.committed, &labels, ribbon_path)?;
        }
        videos.push(ReportVideo {
            id: id.clone(),
            eval,
        });
    }
    let evals: Vec<VideoEval> = videos.iter().map(|v| v.eval.clone()).collect();
    let report_value = EvalReport {
        videos,
        aggregate: aggregate(&evals)?,
    };

    if let Some(report_path) = report {
        let mut text = serde_json::to_string_pretty(&report_value)
            .map_err(|e| ArstError::Invariant(format!("cannot serialize report: {e}")))?;
        text.push('\n');
        std::fs::write(report_path, text).map_err(|e| ArstError::Format {
            path: report_path.display().to_string(),
            reason: format!("cannot write: {e}"),
        })?;
    }
    Ok(report_value)
}
