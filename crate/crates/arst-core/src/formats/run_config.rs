//! The JSON run configuration: one document carrying every knob of a
//! generate → train → infer → eval pipeline, with strict (unknown keys
//! rejected) parsing and documented defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ArstError, Result};
use crate::inference::CciConfig;
use crate::model::ModelConfig;
use crate::synthdata::WorkflowSpec;
use crate::training::TrainConfig;

/// Dataset sizing for synthetic generation.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    /// Inclusive target-length range; generated videos may overshoot by
    /// completing their final phase dwell.
    pub t_min: usize,
    pub t_max: usize,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            n_train: 20,
            n_val: 4,
            n_test: 10,
            t_min: 180,
            t_max: 220,
        }
    }
}

/// Default artifact locations, used when the corresponding command-line
/// flag is omitted.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields, default)]
pub struct PathsConfig {
    pub data_dir: Option<String>,
    pub model: Option<String>,
    pub predictions: Option<String>,
    pub report: Option<String>,
}

/// Complete configuration of a run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Master seed: dataset generation derives per-video streams from it,
    /// and model initialization draws from a derived stream.
    pub seed: u64,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub cci: CciConfig,
    pub workflow: WorkflowSpec,
    pub dataset: DatasetConfig,
    pub paths: PathsConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::desk()
    }
}

impl RunConfig {
    /// Laptop-scale profile: small model, strong learning rate, synthetic
    /// workflow defaults. This is the profile exercised end to end in CI.
    pub fn desk() -> Self {
        RunConfig {
            seed: 7,
            model: ModelConfig::desk(),
            train: TrainConfig::desk(),
            cci: CciConfig::default(),
            workflow: WorkflowSpec::default(),
            dataset: DatasetConfig::default(),
            paths: PathsConfig::default(),
        }
    }

    /// Reference-scale profile: full model width and the published
    /// training schedule. Feature width follows the synthetic workflow.
    pub fn full() -> Self {
        let workflow = WorkflowSpec::default();
        let model = ModelConfig {
            d_feat: workflow.d_feat,
            classes: workflow.classes,
            ..ModelConfig::full()
        };
        RunConfig {
            seed: 7,
            model,
            train: TrainConfig::default(),
            cci: CciConfig::default(),
            workflow,
            dataset: DatasetConfig::default(),
            paths: PathsConfig::default(),
        }
    }

    /// Validates every section and their cross-field consistency.
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.train.validate()?;
        self.cci.validate()?;
        self.workflow.validate()?;
        if self.model.d_feat != self.workflow.d_feat {
            return Err(ArstError::Config(format!(
                "model.d_feat {} does not match workflow.d_feat {}",
                self.model.d_feat, self.workflow.d_feat
            )));
        }
        if self.model.classes != self.workflow.classes {
            return Err(ArstError::Config(format!(
                "model.classes {} does not match workflow.classes {}",
                self.model.classes, self.workflow.classes
            )));
        }
        if self.dataset.t_min > self.dataset.t_max {
            return Err(ArstError::Config(format!(
                "dataset.t_min {} exceeds dataset.t_max {}",
                self.dataset.t_min, self.dataset.t_max
            )));
        }
        if self.dataset.t_min < self.workflow.min_dwell {
            return Err(ArstError::Config(format!(
                "dataset.t_min {} is below workflow.min_dwell {}",
                self.dataset.t_min, self.workflow.min_dwell
            )));
        }
        Ok(())
    }

    /// Reads and validates a configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ArstError::Format {
            path: path.display().to_string(),
            reason: format!("cannot read config: {e}"),
        })?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| ArstError::Config(format!(
            "{}: {e}",
            path.display()
        )))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Writes the configuration as pretty JSON with a trailing newline.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| ArstError::Format {
            path: path.display().to_string(),
            reason: format!("cannot serialize config: {e}"),
        })?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| ArstError::Format {
            path: path.display().to_string(),
            reason: format!("cannot write config: {e}"),
        })
    }
}
