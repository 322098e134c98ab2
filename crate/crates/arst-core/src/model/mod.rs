//! The banded-attention encoder–decoder model.

mod attention;
mod config;
mod embed;
mod layers;
mod mask;
mod params;

pub mod forward;

pub use attention::{attention_forward, AttentionCache};
pub use config::ModelConfig;
pub use embed::{argmax_phase, logits_to_probs, phase_embed, positional_encoding, PhaseToken};
pub use forward::{
    backward, forward_teacher_forced, forward_with_cache, shifted_tokens, ForwardCache,
};
pub use mask::{build_banded_mask, BandedCausalMask};
pub use params::{
    AttentionParams, DecoderParams, EncoderParams, FeedForwardParams, LayerNormParams,
    LinearParams, ModelParams,
};
