//! Per-frame latency measurement on a synthetic stream.

use serde::{Deserialize, Serialize};

use crate::error::{ArstError, Result};
use crate::inference::{run_arst_stream, CciConfig};
use crate::model::{ModelConfig, ModelParams};
use crate::numerics::{Matrix, Scalar, SeededRng};

/// Published throughput of the reference real-time system, echoed in
/// reports for context. Absolute numbers depend on hardware and on the
/// upstream feature extractor, so they are informational only.
pub const REFERENCE_FPS: f64 = 66.0;
pub const REFERENCE_MS_PER_FRAME: f64 = 15.15;

/// Latency statistics for one synthetic stream run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatencyReport {
    pub frames: usize,
    pub mean_ms: f64,
    pub median_ms: f64,
    pub p99_ms: f64,
    pub fps: f64,
    /// Mean over frames 101..=300, when the stream is long enough.
    pub early_mean_ms: Option<f64>,
    /// Mean over frames 1901..=2100, when the stream is long enough.
    pub late_mean_ms: Option<f64>,
    pub reference_fps: f64,
    pub reference_ms_per_frame: f64,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub samples_ms: Vec<f64>,
}

impl LatencyReport {
    /// Mean latency over the 1-based frame range `lo..=hi`.
    pub fn window_mean_ms(&self, lo: usize, hi: usize) -> Option<f64> {
        if lo == 0 || hi < lo || hi > self.samples_ms.len() {
            return None;
        }
        let slice = &self.samples_ms[lo - 1..hi];
        Some(slice.iter().sum::<f64>() / slice.len() as f64)
    }
}

/// Builds latency statistics from raw per-frame samples.
pub fn summarize_latencies(samples_ms: Vec<f64>) -> LatencyReport {
    let frames = samples_ms.len();
    let mean_ms = samples_ms.iter().sum::<f64>() / frames as f64;
    let mut sorted = samples_ms.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("latencies are finite"));
    let median_ms = sorted[frames / 2];
    let p99_idx = ((frames as f64 * 0.99).ceil() as usize).clamp(1, frames) - 1;
    let p99_ms = sorted[p99_idx];
    let mut report = LatencyReport {
        frames,
        mean_ms,
        median_ms,
        p99_ms,
        fps: 1000.0 / mean_ms,
        early_mean_ms: None,
        late_mean_ms: None,
        reference_fps: REFERENCE_FPS,
        reference_ms_per_frame: REFERENCE_MS_PER_FRAME,
        samples_ms,
    };
    report.early_mean_ms = report.window_mean_ms(101, 300);
    report.late_mean_ms = report.window_mean_ms(1901, 2100);
    report
}

/// Streams `frames` random feature vectors through a fresh decoder and
/// reports per-frame wall-clock latency.
pub fn bench_latency<T: Scalar>(
    params: &ModelParams<T>,
    cfg: &ModelConfig,
    cci: &CciConfig,
    frames: usize,
    seed: u64,
) -> Result<LatencyReport> {
    if frames < 100 {
        return Err(ArstError::Config(format!(
            "latency benchmark needs at least 100 frames, got {frames}"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let features = Matrix::from_vec(
        frames,
        cfg.d_feat,
        (0..frames * cfg.d_feat)
            .map(|_| T::from_f64(rng.uniform(-1.0, 1.0)))
            .collect(),
    )?;
    let result = run_arst_stream(params, cfg, cci, &features)?;
    Ok(summarize_latencies(result.latencies_ms))
}
