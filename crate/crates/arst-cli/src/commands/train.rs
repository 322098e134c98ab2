//! Training command.

use std::io::Write;
use std::path::Path;

use arst_core::formats::{read_dataset, save_checkpoint, RunConfig};
use arst_core::model::ModelParams;
use arst_core::numerics::{Parameterized, SeededRng};
use arst_core::synthdata::{Split, SyntheticDataset, SyntheticVideo};
use arst_core::training::{TrainSample, Trainer};
use arst_core::{ArstError, Result};
use serde::Serialize;

/// Keyed derivation stream for parameter initialization, far from the
/// small stream indices the data generator consumes from the same master
/// seed.
const INIT_STREAM: u64 = 0x5452_4149_4Eu64;

/// One line of training progress, emitted as JSON per epoch.
#[derive(Debug, Serialize)]
struct EpochLine {
    epoch: usize,
    mean_loss: f64,
}

/// Final training summary.
#[derive(Debug, Serialize)]
pub struct TrainSummary {
    pub model_path: String,
    pub epochs: usize,
    pub final_loss: f64,
    pub train_videos: usize,
    pub parameters: usize,
}

/// Checks that a dataset was generated for the dimensions the model
/// expects, naming the offending configuration key otherwise.
fn check_compatible(cfg: &RunConfig, dataset: &SyntheticDataset) -> Result<()> {
    if dataset.spec.d_feat != cfg.model.d_feat {
        return Err(ArstError::Config(format!(
            "model.d_feat is {} but the dataset holds {}-wide features",
            cfg.model.d_feat, dataset.spec.d_feat
        )));
    }
    if dataset.spec.classes != cfg.model.classes {
        return Err(ArstError::Config(format!(
            "model.classes is {} but the dataset was generated with {} phases",
            cfg.model.classes, dataset.spec.classes
        )));
    }
    Ok(())
}

/// Trains a fresh model on `videos` under `cfg`, reporting each epoch's
/// mean loss through `on_epoch`. Training runs in 64-bit; the caller
/// quantizes once when persisting.
pub fn train_on_videos(
    cfg: &RunConfig,
    videos: &[&SyntheticVideo],
    on_epoch: impl FnMut(usize, f64) -> Result<()>,
) -> Result<(ModelParams<f64>, Vec<f64>)> {
    if videos.is_empty() {
        return Err(ArstError::Config(
            "dataset has no training videos".into(),
        ));
    }
    let samples: Vec<TrainSample<f64>> = videos
        .iter()
        .map(|v| TrainSample::new(v.id.clone(), v.features.cast::<f64>(), v.labels.clone()))
        .collect();
    let mut params = ModelParams::<f64>::init(
        &cfg.model,
        &mut SeededRng::new(cfg.seed).derive(INIT_STREAM),
    )?;
    let mut trainer = Trainer::new(cfg.train.clone(), &params)?;
    let losses = trainer.fit_with(&mut params, &cfg.model, &samples, on_epoch)?;
    Ok((params, losses))
}

/// Trains on the train split of `data` and writes a checkpoint to
/// `out_model`. Each epoch's mean loss goes to `log` as one JSON line.
pub fn cmd_train(
    data: &Path,
    config: &Path,
    out_model: &Path,
    log: &mut dyn Write,
) -> Result<TrainSummary> {
    let cfg = RunConfig::load(config)?;
    let dataset = read_dataset(data)?;
    check_compatible(&cfg, &dataset)?;

    let train_videos: Vec<&SyntheticVideo> = dataset.split(Split::Train).collect();
    let (params, losses) = train_on_videos(&cfg, &train_videos, |epoch, mean_loss| {
        if !mean_loss.is_finite() {
            return Err(ArstError::Numeric(format!(
                "epoch {epoch} mean loss is {mean_loss}"
            )));
        }
        let line = serde_json::to_string(&EpochLine { epoch, mean_loss })
            .map_err(|e| ArstError::Invariant(format!("cannot serialize epoch line: {e}")))?;
        writeln!(log, "{line}")?;
        log.flush()?;
        Ok(())
    })?;

    let params32 = params.cast::<f32>();
    save_checkpoint(out_model, &params32, &cfg)?;
    Ok(TrainSummary {
        model_path: out_model.display().to_string(),
        epochs: losses.len(),
        final_loss: *losses.last().expect("at least one epoch"),
        train_videos: train_videos.len(),
        parameters: params32.parameter_count(),
    })
}
