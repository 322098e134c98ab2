//! Teacher-forced forward pass and the matching backward pass.
//!
//! Both encoder and decoder are single layers in the post-norm style:
//! every sublayer computes `LayerNorm(x + Sublayer(x))`. The encoder
//! reads projected frame features plus positional encoding; the decoder
//! reads embedded phase tokens plus positional encoding, attends to its
//! own past through a banded self-attention, then to the encoder outputs
//! through a banded cross-attention. Decoder position `t` (1-based)
//! produces the logits for frame `t` while seeing only features
//! `max(1, t - 2W) ..= t` and fed tokens `max(0, t - 1 - W) ..= t - 1` —
//! the band of the cross-attention composes with the encoder band to give
//! the `2W` feature horizon.

use crate::error::{ArstError, Result};
use crate::model::attention::{attention_backward, attention_forward, AttentionCache};
use crate::model::embed::{phase_embed, positional_encoding, PhaseToken};
use crate::model::layers::{
    ffn_backward, ffn_forward, layer_norm_rows_backward, layer_norm_rows_forward, linear_backward,
    linear_forward, FfnCache, LayerNormCache,
};
use crate::model::mask::{build_banded_mask, BandedCausalMask};
use crate::model::params::ModelParams;
use crate::model::ModelConfig;
use crate::numerics::{Matrix, Scalar};

/// Everything the backward pass needs from one forward evaluation.
#[derive(Debug, Clone)]
pub struct ForwardCache<T> {
    mask: BandedCausalMask,
    features: Matrix<T>,
    enc_attn: AttentionCache<T>,
    enc_ln1: LayerNormCache<T>,
    enc_ffn: FfnCache<T>,
    enc_ln2: LayerNormCache<T>,
    dec_attn: AttentionCache<T>,
    dec_ln1: LayerNormCache<T>,
    cross_attn: AttentionCache<T>,
    dec_ln2: LayerNormCache<T>,
    dec_ffn: FfnCache<T>,
    dec_ln3: LayerNormCache<T>,
    /// Decoder output rows, the classifier head input.
    head_in: Matrix<T>,
}

/// Validates the fed token sequence: the start token exactly at position
/// 0, in-range phase ids everywhere else.
fn validate_tokens(tokens: &[PhaseToken], classes: usize) -> Result<()> {
    if tokens.is_empty() {
        return Err(ArstError::Invariant("empty token sequence".into()));
    }
    if tokens[0] != PhaseToken::Bos {
        return Err(ArstError::Invariant(
            "decoder input must start with the start token".into(),
        ));
    }
    for (i, tok) in tokens.iter().enumerate().skip(1) {
        match *tok {
            PhaseToken::Bos => {
                return Err(ArstError::Invariant(format!(
                    "start token re-appears at decoder position {i}"
                )))
            }
            PhaseToken::Phase(id) => {
                if id == 0 || id as usize > classes {
                    return Err(ArstError::PhaseId {
                        id,
                        classes: classes as u32,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Teacher-forced forward pass over a whole sequence.
///
/// `features` is the `T x d_feat` frame matrix; `tokens` the length-`T`
/// shifted label sequence `[BOS, y_1, ..., y_(T-1)]`. Returns the
/// `T x classes` logits, row `t-1` scoring frame `t`.
pub fn forward_teacher_forced<T: Scalar>(
    params: &ModelParams<T>,
    cfg: &ModelConfig,
    features: &Matrix<T>,
    tokens: &[PhaseToken],
) -> Result<Matrix<T>> {
    forward_with_cache(params, cfg, features, tokens).map(|(logits, _)| logits)
}

/// Forward pass that also returns the cache consumed by [`backward`].
pub fn forward_with_cache<T: Scalar>(
    params: &ModelParams<T>,
    cfg: &ModelConfig,
    features: &Matrix<T>,
    tokens: &[PhaseToken],
) -> Result<(Matrix<T>, ForwardCache<T>)> {
    let frames = features.rows();
    if frames == 0 {
        return Err(ArstError::Invariant("empty feature sequence".into()));
    }
    if features.cols() != cfg.d_feat {
        return Err(ArstError::shape(
            "forward features",
            features.shape(),
            (frames, cfg.d_feat),
        ));
    }
    if tokens.len() != frames {
        return Err(ArstError::LengthMismatch {
            pred: tokens.len(),
            gt: frames,
        });
    }
    validate_tokens(tokens, cfg.classes)?;
    let mask = build_banded_mask(frames, cfg.band_width);
    let eps = T::from_f64(cfg.ln_eps);

    // Encoder: projected features plus positional encoding.
    let mut x = linear_forward(features, &params.input_proj)?;
    for i in 0..frames {
        let pe = positional_encoding::<T>(i, cfg);
        for (v, p) in x.row_mut(i).iter_mut().zip(pe) {
            *v += p;
        }
    }
    let (attn_out, enc_attn) = attention_forward(&x, &x, &params.encoder.self_attn, &mask, cfg)?;
    let (x1, enc_ln1) = layer_norm_rows_forward(&x.add(&attn_out)?, &params.encoder.norm1, eps)?;
    let (ffn_out, enc_ffn) = ffn_forward(&x1, &params.encoder.ffn)?;
    let (enc_out, enc_ln2) =
        layer_norm_rows_forward(&x1.add(&ffn_out)?, &params.encoder.norm2, eps)?;

    // Decoder: embedded fed tokens plus positional encoding.
    let mut e = Matrix::zeros(frames, cfg.d_model);
    for i in 0..frames {
        let emb = phase_embed::<T>(tokens[i], cfg)?;
        let pe = positional_encoding::<T>(i, cfg);
        for (v, (a, b)) in e.row_mut(i).iter_mut().zip(emb.into_iter().zip(pe)) {
            *v = a + b;
        }
    }
    let (self_out, dec_attn) = attention_forward(&e, &e, &params.decoder.self_attn, &mask, cfg)?;
    let (y1, dec_ln1) = layer_norm_rows_forward(&e.add(&self_out)?, &params.decoder.norm1, eps)?;
    let (cross_out, cross_attn) =
        attention_forward(&y1, &enc_out, &params.decoder.cross_attn, &mask, cfg)?;
    let (y2, dec_ln2) = layer_norm_rows_forward(&y1.add(&cross_out)?, &params.decoder.norm2, eps)?;
    let (ffn2_out, dec_ffn) = ffn_forward(&y2, &params.decoder.ffn)?;
    let (y3, dec_ln3) = layer_norm_rows_forward(&y2.add(&ffn2_out)?, &params.decoder.norm3, eps)?;
    let logits = linear_forward(&y3, &params.head)?;
    if !logits.is_finite() {
        return Err(ArstError::Numeric(
            "forward pass produced non-finite logits".into(),
        ));
    }

    let cache = ForwardCache {
        mask,
        features: features.clone(),
        enc_attn,
        enc_ln1,
        enc_ffn,
        enc_ln2,
        dec_attn,
        dec_ln1,
        cross_attn,
        dec_ln2,
        dec_ffn,
        dec_ln3,
        head_in: y3,
    };
    Ok((logits, cache))
}

/// Backward pass: accumulates gradients for every parameter given the
/// gradient of the loss with respect to the logits.
pub fn backward<T: Scalar>(
    params: &mut ModelParams<T>,
    cfg: &ModelConfig,
    cache: &ForwardCache<T>,
    dlogits: &Matrix<T>,
) -> Result<()> {
    let mask = &cache.mask;

    // Decoder, classifier head downward.
    let d_y3 = linear_backward(&cache.head_in, &mut params.head, dlogits)?;
    let d_r3 = layer_norm_rows_backward(&cache.dec_ln3, &mut params.decoder.norm3, &d_y3)?;
    let mut d_y2 = ffn_backward(&cache.dec_ffn, &mut params.decoder.ffn, &d_r3)?;
    d_y2.add_assign(&d_r3)?;
    let d_r2 = layer_norm_rows_backward(&cache.dec_ln2, &mut params.decoder.norm2, &d_y2)?;
    let (d_y1_attn, d_enc_out) = attention_backward(
        &cache.cross_attn,
        &mut params.decoder.cross_attn,
        mask,
        cfg,
        &d_r2,
    )?;
    let mut d_y1 = d_y1_attn;
    d_y1.add_assign(&d_r2)?;
    let d_r1 = layer_norm_rows_backward(&cache.dec_ln1, &mut params.decoder.norm1, &d_y1)?;
    // Decoder inputs are fixed embeddings; their gradient stops here, but
    // the self-attention projections still need their parameter grads.
    let _ = attention_backward(
        &cache.dec_attn,
        &mut params.decoder.self_attn,
        mask,
        cfg,
        &d_r1,
    )?;

    // Encoder, driven by the cross-attention key/value gradient.
    let d_e2 = layer_norm_rows_backward(&cache.enc_ln2, &mut params.encoder.norm2, &d_enc_out)?;
    let mut d_x1 = ffn_backward(&cache.enc_ffn, &mut params.encoder.ffn, &d_e2)?;
    d_x1.add_assign(&d_e2)?;
    let d_e1 = layer_norm_rows_backward(&cache.enc_ln1, &mut params.encoder.norm1, &d_x1)?;
    let (dxq, dxkv) = attention_backward(
        &cache.enc_attn,
        &mut params.encoder.self_attn,
        mask,
        cfg,
        &d_e1,
    )?;
    let mut d_x = dxq;
    d_x.add_assign(&dxkv)?;
    d_x.add_assign(&d_e1)?;
    // Positional encoding is an additive constant, so `d_x` reaches the
    // input projection unchanged.
    let _ = linear_backward(&cache.features, &mut params.input_proj, &d_x)?;
    Ok(())
}

/// Builds the teacher-forcing token sequence `[BOS, y_1, ..., y_(T-1)]`
/// from ground-truth labels.
pub fn shifted_tokens(labels: &[u32]) -> Vec<PhaseToken> {
    let mut tokens = Vec::with_capacity(labels.len());
    tokens.push(PhaseToken::Bos);
    for &y in &labels[..labels.len().saturating_sub(1)] {
        tokens.push(PhaseToken::Phase(y));
    }
    tokens
}
