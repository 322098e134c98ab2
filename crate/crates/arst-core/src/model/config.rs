//! Model hyperparameters.

use serde::{Deserialize, Serialize};

use crate::error::{ArstError, Result};

/// Hyperparameters of the banded-attention encoder–decoder.
///
/// Two ready-made profiles exist: [`ModelConfig::full`] mirrors the
/// published configuration (512-dimensional embeddings, 8 heads, band
/// width 5, 7 phases), and [`ModelConfig::desk`] is a small profile that
/// trains in seconds on a laptop and is used by the test suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// Embedding width shared by encoder and decoder streams.
    pub d_model: usize,
    /// Number of attention heads; must divide `d_model`.
    pub n_heads: usize,
    /// Attention band width `W`: each position may attend to itself and
    /// the `W` previous positions. `0` means self-only attention.
    pub band_width: usize,
    /// Number of phase classes `c`.
    pub classes: usize,
    /// Width of the incoming per-frame feature vectors.
    pub d_feat: usize,
    /// Hidden width of the position-wise feed-forward blocks.
    /// `None` selects the conventional `4 * d_model`.
    pub d_ffn: Option<usize>,
    /// Epsilon inside the layer-norm square root.
    pub ln_eps: f64,
    /// Base of the sinusoidal positional encoding frequencies.
    pub pe_base: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::full()
    }
}

impl ModelConfig {
    /// Published configuration: 512-wide embeddings over 512-wide frame
    /// features, 8 heads, band width 5, 7 phase classes.
    pub fn full() -> Self {
        ModelConfig {
            d_model: 512,
            n_heads: 8,
            band_width: 5,
            classes: 7,
            d_feat: 512,
            d_ffn: None,
            ln_eps: 1e-5,
            pe_base: 10_000.0,
        }
    }

    /// Small profile for fast experiments and tests.
    pub fn desk() -> Self {
        ModelConfig {
            d_model: 64,
            n_heads: 4,
            band_width: 5,
            classes: 7,
            d_feat: 32,
            d_ffn: None,
            ln_eps: 1e-5,
            pe_base: 10_000.0,
        }
    }

    /// Feed-forward hidden width, defaulting to `4 * d_model`.
    pub fn d_ffn(&self) -> usize {
        self.d_ffn.unwrap_or(4 * self.d_model)
    }

    /// Per-head width.
    pub fn d_head(&self) -> usize {
        self.d_model / self.n_heads
    }

    /// Checks internal consistency; returns the offending constraint on
    /// failure.
    pub fn validate(&self) -> Result<()> {
        if self.d_model == 0 || self.n_heads == 0 || self.d_feat == 0 {
            return Err(ArstError::Config(
                "d_model, n_heads and d_feat must all be positive".into(),
            ));
        }
        if self.d_model % self.n_heads != 0 {
            return Err(ArstError::Config(format!(
                "n_heads ({}) must divide d_model ({})",
                self.n_heads, self.d_model
            )));
        }
        if self.classes < 2 {
            return Err(ArstError::Config(format!(
                "classes must be at least 2, got {}",
                self.classes
            )));
        }
        if self.d_ffn() == 0 {
            return Err(ArstError::Config("d_ffn must be positive".into()));
        }
        if !(self.ln_eps > 0.0) {
            return Err(ArstError::Config(format!(
                "ln_eps must be positive, got {}",
                self.ln_eps
            )));
        }
        if !(self.pe_base > 1.0) {
            return Err(ArstError::Config(format!(
                "pe_base must exceed 1, got {}",
                self.pe_base
            )));
        }
        Ok(())
    }

    /// Closed-form number of trainable scalars for this configuration:
    /// input projection, three attention sublayers (Q/K/V/output
    /// projections with biases), two feed-forward blocks, five layer
    /// norms, and the classifier head.
    pub fn expected_parameter_count(&self) -> usize {
        let d = self.d_model;
        let f = self.d_ffn();
        let input = self.d_feat * d + d;
        let attn = 4 * (d * d + d);
        let ffn = d * f + f + f * d + d;
        let ln = 2 * d;
        let head = d * self.classes + self.classes;
        input + 3 * attn + 2 * ffn + 5 * ln + head
    }
}
