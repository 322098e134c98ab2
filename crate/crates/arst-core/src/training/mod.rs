//! Teacher-forced training loop: cross-entropy loss, Adam updates, and a
//! deterministic per-epoch schedule that takes one optimizer step per video.

mod adam;
mod loss;

pub use adam::{adam_step, AdamState};
pub use loss::cross_entropy;

use serde::{Deserialize, Serialize};

use crate::error::{ArstError, Result};
use crate::model::{backward, forward_with_cache, shifted_tokens, ModelConfig, ModelParams};
use crate::numerics::{Matrix, Parameterized, Scalar, SeededRng};

/// Optimizer schedule and loop hyperparameters.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    /// Maximum global gradient norm; gradients are rescaled above it.
    pub grad_clip: Option<f64>,
    /// Seed for the per-epoch shuffle of video order.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-5,
            epochs: 20,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            grad_clip: None,
            seed: 17,
        }
    }
}

impl TrainConfig {
    /// Faster schedule sized for the small laptop-scale model profile.
    pub fn desk() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(ArstError::Config(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        if self.epochs == 0 {
            return Err(ArstError::Config("epochs must be at least 1".into()));
        }
        for (name, v) in [("adam_beta1", self.adam_beta1), ("adam_beta2", self.adam_beta2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(ArstError::Config(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        if !(self.adam_eps > 0.0) {
            return Err(ArstError::Config(format!(
                "adam_eps must be positive, got {}",
                self.adam_eps
            )));
        }
        if let Some(clip) = self.grad_clip {
            if !(clip > 0.0) {
                return Err(ArstError::Config(format!(
                    "grad_clip must be positive when set, got {clip}"
                )));
            }
        }
        Ok(())
    }
}

/// One labeled video: a frame-by-feature matrix plus 1-based phase labels.
#[derive(Debug, Clone)]
pub struct TrainSample<T> {
    pub id: String,
    pub features: Matrix<T>,
    pub labels: Vec<u32>,
}

impl<T: Scalar> TrainSample<T> {
    pub fn new(id: impl Into<String>, features: Matrix<T>, labels: Vec<u32>) -> Self {
        TrainSample {
            id: id.into(),
            features,
            labels,
        }
    }
}

/// Rescales all gradients so their global L2 norm does not exceed `max_norm`.
fn clip_gradients<T: Scalar, M: Parameterized<T>>(model: &mut M, max_norm: f64) {
    let mut sq_sum = T::zero();
    for p in model.parameters() {
        for &g in p.grad.data() {
            sq_sum += g * g;
        }
    }
    let norm = sq_sum.sqrt().to_f64();
    if norm > max_norm {
        let scale = T::from_f64(max_norm / norm);
        for p in model.parameters_mut() {
            for g in p.grad.data_mut() {
                *g *= scale;
            }
        }
    }
}

/// Runs one pass over the dataset in the order given, taking one Adam step
/// per video. Returns the mean per-video loss.
pub fn train_epoch<T: Scalar>(
    params: &mut ModelParams<T>,
    model_cfg: &ModelConfig,
    adam: &mut AdamState<T>,
    dataset: &[&TrainSample<T>],
    cfg: &TrainConfig,
) -> Result<T> {
    if dataset.is_empty() {
        return Err(ArstError::Config("training set is empty".into()));
    }
    let mut total = T::zero();
    for sample in dataset {
        params.zero_grads();
        let tokens = shifted_tokens(&sample.labels);
        let (logits, cache) = forward_with_cache(params, model_cfg, &sample.features, &tokens)
            .map_err(|e| annotate(e, &sample.id))?;
        let (video_loss, dlogits) =
            cross_entropy(&logits, &sample.labels).map_err(|e| annotate(e, &sample.id))?;
        backward(params, model_cfg, &cache, &dlogits).map_err(|e| annotate(e, &sample.id))?;
        if let Some(max_norm) = cfg.grad_clip {
            clip_gradients(params, max_norm);
        }
        adam_step(params, adam, cfg).map_err(|e| annotate(e, &sample.id))?;
        total += video_loss;
    }
    Ok(total / T::from_f64(dataset.len() as f64))
}

fn annotate(err: ArstError, video: &str) -> ArstError {
    match err {
        ArstError::Numeric(msg) => ArstError::Numeric(format!("video {video}: {msg}")),
        other => other,
    }
}

/// Owns the optimizer state and shuffle stream for a full training run.
pub struct Trainer<T> {
    cfg: TrainConfig,
    adam: AdamState<T>,
    rng: SeededRng,
}

impl<T: Scalar> Trainer<T> {
    pub fn new(cfg: TrainConfig, params: &ModelParams<T>) -> Result<Self> {
        cfg.validate()?;
        let rng = SeededRng::new(cfg.seed);
        Ok(Trainer {
            adam: AdamState::new(params),
            cfg,
            rng,
        })
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    /// Trains for the configured number of epochs, reshuffling the video
    /// order each epoch. Returns one mean loss per epoch.
    pub fn fit(
        &mut self,
        params: &mut ModelParams<T>,
        model_cfg: &ModelConfig,
        dataset: &[TrainSample<T>],
    ) -> Result<Vec<T>> {
        self.fit_with(params, model_cfg, dataset, |_, _| Ok(()))
    }

    /// Runs the schedule and invokes `on_epoch(epoch_number, mean_loss)`
    /// after each epoch, with epochs numbered from 1. An error from the
    /// callback aborts training.
    pub fn fit_with(
        &mut self,
        params: &mut ModelParams<T>,
        model_cfg: &ModelConfig,
        dataset: &[TrainSample<T>],
        mut on_epoch: impl FnMut(usize, T) -> Result<()>,
    ) -> Result<Vec<T>> {
        let mut losses = Vec::with_capacity(self.cfg.epochs);
        let mut order: Vec<usize> = (0..dataset.len()).collect();
        for epoch in 1..=self.cfg.epochs {
            self.rng.shuffle(&mut order);
            let shuffled: Vec<&TrainSample<T>> = order.iter().map(|&i| &dataset[i]).collect();
            let loss = train_epoch(params, model_cfg, &mut self.adam, &shuffled, &self.cfg)?;
            losses.push(loss);
            on_epoch(epoch, loss)?;
        }
        Ok(losses)
    }
}
