//! Banded multi-head attention, forward and backward.

use crate::error::Result;
use crate::model::layers::{linear_backward, linear_forward};
use crate::model::mask::BandedCausalMask;
use crate::model::params::AttentionParams;
use crate::model::ModelConfig;
use crate::numerics::{masked_softmax_backward, masked_softmax_rows, Matrix, Scalar};

/// Forward cache of one attention sublayer.
#[derive(Debug, Clone)]
pub struct AttentionCache<T> {
    /// Query-side input (`T x d_model`).
    pub xq: Matrix<T>,
    /// Key/value-side input; equals `xq` for self-attention.
    pub xkv: Matrix<T>,
    /// Projected queries, keys, values (`T x d_model` each).
    pub q: Matrix<T>,
    pub k: Matrix<T>,
    pub v: Matrix<T>,
    /// Per-head attention probabilities (`T x T` each).
    pub probs: Vec<Matrix<T>>,
    /// Concatenated per-head context before the output projection.
    pub concat: Matrix<T>,
}

/// Multi-head attention with a banded causal mask.
///
/// Queries come from `xq`, keys and values from `xkv` (the two coincide
/// for self-attention; for cross-attention `xkv` is the encoder output).
/// Row `t` of the result attends only to key positions inside the mask
/// window of `t`, with scores scaled by `1 / sqrt(d_head)` before the
/// masked softmax.
pub fn attention_forward<T: Scalar>(
    xq: &Matrix<T>,
    xkv: &Matrix<T>,
    attn: &AttentionParams<T>,
    mask: &BandedCausalMask,
    cfg: &ModelConfig,
) -> Result<(Matrix<T>, AttentionCache<T>)> {
    let q = linear_forward(xq, &attn.query)?;
    let k = linear_forward(xkv, &attn.key)?;
    let v = linear_forward(xkv, &attn.value)?;

    let dh = cfg.d_head();
    let scale = T::from_f64(1.0 / (dh as f64).sqrt());
    let mut concat = Matrix::zeros(xq.rows(), cfg.d_model);
    let mut probs = Vec::with_capacity(cfg.n_heads);
    for h in 0..cfg.n_heads {
        let qh = q.slice_columns(h * dh, dh);
        let kh = k.slice_columns(h * dh, dh);
        let vh = v.slice_columns(h * dh, dh);
        let mut scores = qh.matmul_transpose(&kh)?;
        scores.scale(scale);
        let ph = masked_softmax_rows(&scores, |i| mask.window0(i))?;
        let ctx = ph.matmul(&vh)?;
        concat.add_into_columns(h * dh, &ctx)?;
        probs.push(ph);
    }
    let out = linear_forward(&concat, &attn.output)?;
    Ok((
        out,
        AttentionCache {
            xq: xq.clone(),
            xkv: xkv.clone(),
            q,
            k,
            v,
            probs,
            concat,
        },
    ))
}

/// Backward of [`attention_forward`].
///
/// Accumulates projection gradients and returns `(dxq, dxkv)`. For
/// self-attention the caller adds the two together; for cross-attention
/// `dxkv` flows back into the encoder.
pub fn attention_backward<T: Scalar>(
    cache: &AttentionCache<T>,
    attn: &mut AttentionParams<T>,
    mask: &BandedCausalMask,
    cfg: &ModelConfig,
    dout: &Matrix<T>,
) -> Result<(Matrix<T>, Matrix<T>)> {
    let dh = cfg.d_head();
    let scale = T::from_f64(1.0 / (dh as f64).sqrt());

    let dconcat = linear_backward(&cache.concat, &mut attn.output, dout)?;

    let mut dq = Matrix::zeros(cache.q.rows(), cache.q.cols());
    let mut dk = Matrix::zeros(cache.k.rows(), cache.k.cols());
    let mut dv = Matrix::zeros(cache.v.rows(), cache.v.cols());
    for h in 0..cfg.n_heads {
        let qh = cache.q.slice_columns(h * dh, dh);
        let kh = cache.k.slice_columns(h * dh, dh);
        let vh = cache.v.slice_columns(h * dh, dh);
        let ph = &cache.probs[h];
        let dctx = dconcat.slice_columns(h * dh, dh);

        let dph = dctx.matmul_transpose(&vh)?;
        let dvh = ph.transpose_matmul(&dctx)?;
        let mut dscores = masked_softmax_backward(ph, &dph, |i| mask.window0(i))?;
        dscores.scale(scale);
        let dqh = dscores.matmul(&kh)?;
        let dkh = dscores.transpose_matmul(&qh)?;

        dq.add_into_columns(h * dh, &dqh)?;
        dk.add_into_columns(h * dh, &dkh)?;
        dv.add_into_columns(h * dh, &dvh)?;
    }

    let dxq = linear_backward(&cache.xq, &mut attn.query, &dq)?;
    let mut dxkv = linear_backward(&cache.xkv, &mut attn.key, &dk)?;
    dxkv.add_assign(&linear_backward(&cache.xkv, &mut attn.value, &dv)?)?;
    Ok((dxq, dxkv))
}
