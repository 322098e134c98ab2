//! Dataset generation command.

use std::path::Path;

use arst_core::formats::{write_dataset, RunConfig};
use arst_core::synthdata::{gen_dataset, Split};
use arst_core::Result;
use serde::Serialize;

/// What `gen` produced, printed as one JSON line.
#[derive(Debug, Serialize)]
pub struct GenSummary {
    pub out_dir: String,
    pub seed: u64,
    pub train_videos: usize,
    pub val_videos: usize,
    pub test_videos: usize,
    pub total_frames: usize,
}

/// Generates a synthetic dataset into `out` from the run configuration at
/// `config`; `seed` overrides the configured master seed when given.
pub fn cmd_gen(config: &Path, out: &Path, seed: Option<u64>) -> Result<GenSummary> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let dataset = gen_dataset(
        &cfg.workflow,
        cfg.seed,
        cfg.dataset.n_train,
        cfg.dataset.n_val,
        cfg.dataset.n_test,
        (cfg.dataset.t_min, cfg.dataset.t_max),
    )?;
    write_dataset(out, &dataset)?;
    Ok(GenSummary {
        out_dir: out.display().to_string(),
        seed: cfg.seed,
        train_videos: dataset.split(Split::Train).count(),
        val_videos: dataset.split(Split::Val).count(),
        test_videos: dataset.split(Split::Test).count(),
        total_frames: dataset.videos.iter().map(|v| v.labels.len()).sum(),
    })
}
