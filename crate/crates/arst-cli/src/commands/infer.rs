//! Streaming inference command.

use std::path::{Path, PathBuf};

use arst_core::formats::{load_checkpoint, read_feature_file, write_predictions};
use arst_core::inference::{run_arst_stream, summarize_latencies, CciConfig, LatencyReport};
use arst_core::{ArstError, Result};
use serde::Serialize;

/// Decoding options.
#[derive(Debug, Clone, Default)]
pub struct InferOptions {
    /// Confirm phase transitions with lookahead before committing.
    pub cci: bool,
    /// Lookahead depth; defaults to the checkpoint's configured value.
    pub n: Option<usize>,
    /// Write a latency report to this path.
    pub bench: Option<PathBuf>,
}

/// Latency report written by `--bench`.
#[derive(Debug, Serialize)]
pub struct InferReport {
    pub cci_enabled: bool,
    /// Lookahead depth in effect for this run.
    pub n: usize,
    pub latency: LatencyReport,
}

/// What `infer` produced, printed as one JSON line.
#[derive(Debug, Serialize)]
pub struct InferSummary {
    pub out_path: String,
    pub frames: usize,
    pub cci_enabled: bool,
    pub n: usize,
    pub committed_transitions: usize,
    pub accepted_transitions: usize,
}

/// Decodes the feature stream at `features` with the checkpoint at
/// `model` and writes the per-frame CSV to `out`.
pub fn cmd_infer(
    model: &Path,
    features: &Path,
    opts: &InferOptions,
    out: &Path,
) -> Result<InferSummary> {
    let (params, run_cfg) = load_checkpoint(model)?;
    let frames = read_feature_file(features)?;
    if frames.cols() != run_cfg.model.d_feat {
        return Err(ArstError::Format {
            path: features.display().to_string(),
            reason: format!(
                "feature width {} does not match the model's {}",
                frames.cols(),
                run_cfg.model.d_feat
            ),
        });
    }

    let n = opts.n.unwrap_or(run_cfg.cci.n);
    let cci = CciConfig {
        enabled: opts.cci,
        n,
    };
    let result = run_arst_stream(&params, &run_cfg.model, &cci, &frames)?;
    write_predictions(out, &result.committed, &result.probs)?;

    if let Some(bench_path) = &opts.bench {
        let report = InferReport {
            cci_enabled: cci.enabled,
            n,
            latency: summarize_latencies(result.latencies_ms.clone()),
        };
        let mut text = serde_json::to_string_pretty(&report)
            .map_err(|e| ArstError::Invariant(format!("cannot serialize report: {e}")))?;
        text.push('\n');
        std::fs::write(bench_path, text).map_err(|e| ArstError::Format {
            path: bench_path.display().to_string(),
            reason: format!("cannot write: {e}"),
        })?;
    }

    Ok(InferSummary {
        out_path: out.display().to_string(),
        frames: result.frames(),
        cci_enabled: cci.enabled,
        n,
        committed_transitions: result.committed_transition_count(),
        accepted_transitions: result.accepted_transitions.len(),
    })
}
