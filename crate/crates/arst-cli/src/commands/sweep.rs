//! Band-width ablation sweep.

use std::path::Path;

use arst_core::formats::{read_dataset, RunConfig};
use arst_core::inference::{run_arst_stream, CciConfig};
use arst_core::metrics::{aggregate, eval_video, VideoEval};
use arst_core::synthdata::{Split, SyntheticDataset, SyntheticVideo};
use arst_core::{ArstError, Result};
use serde::Serialize;

use crate::commands::train::train_on_videos;

/// Aggregate test-split metrics for one band width.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub w: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub jaccard: f64,
}

/// Worker count: the `ARST_THREADS` variable caps parallelism, defaulting
/// to one thread per band width.
fn worker_cap(jobs: usize) -> usize {
    std::env::var("ARST_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(jobs)
        .min(jobs)
}

/// Trains a model with band width `w` on the train split and evaluates a
/// greedy decode of every test video.
fn sweep_one(cfg: &RunConfig, dataset: &SyntheticDataset, w: usize) -> Result<SweepRow> {
    let mut cfg_w = cfg.clone();
    cfg_w.model.band_width = w;

    let train_videos: Vec<&SyntheticVideo> = dataset.split(Split::Train).collect();
    let (params, _) = train_on_videos(&cfg_w, &train_videos, |_, _| Ok(()))?;
    let params32 = params.cast::<f32>();

    let mut evals: Vec<VideoEval> = Vec::new();
    for video in dataset.split(Split::Test) {
        let result = run_arst_stream(
            &params32,
            &cfg_w.model,
            &CciConfig::disabled(),
            &video.features,
        )?;
        evals.push(eval_video(&result.committed, &video.labels)?);
    }
    if evals.is_empty() {
        return Err(ArstError::Config("dataset has no test videos".into()));
    }
    let agg = aggregate(&evals)?;
    Ok(SweepRow {
        w,
        accuracy: agg.accuracy.mean,
        precision: agg.precision.mean,
        recall: agg.recall.mean,
        jaccard: agg.jaccard.mean,
    })
}

/// Runs the sweep, one model per requested band width with identical
/// seeds and data. Workers run in parallel up to [`worker_cap`]; results
/// come back in the order requested regardless of scheduling.
pub fn cmd_sweep_w(data: &Path, config: &Path, w_list: &[usize]) -> Result<Vec<SweepRow>> {
    if w_list.is_empty() {
        return Err(ArstError::Config("w-list must not be empty".into()));
    }
    let cfg = RunConfig::load(config)?;
    let dataset = read_dataset(data)?;

    let cap = worker_cap(w_list.len());
    let mut rows: Vec<Option<Result<SweepRow>>> = Vec::new();
    rows.resize_with(w_list.len(), || None);
    let cfg_ref = &cfg;
    let dataset_ref = &dataset;
    for (chunk_idx, chunk) in w_list.chunks(cap).enumerate() {
        let results: Vec<Result<SweepRow>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&w| scope.spawn(move || sweep_one(cfg_ref, dataset_ref, w)))
                .collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join().unwrap_or_else(|_| {
                        Err(ArstError::Invariant("sweep worker panicked".into()))
                    })
                })
                .collect()
        });
        for (offset, result) in results.into_iter().enumerate() {
            rows[chunk_idx * cap + offset] = Some(result);
        }
    }
    rows.into_iter()
        .map(|slot| slot.expect("every slot filled"))
        .collect()
}

/// Fixed-format CSV table, identical across reruns and thread counts.
pub fn render_sweep_table(rows: &[SweepRow]) -> String {
    let mut out = String::from("w,accuracy,precision,recall,jaccard\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6}\n",
            r.w, r.accuracy, r.precision, r.recall, r.jaccard
        ));
    }
    out
}
