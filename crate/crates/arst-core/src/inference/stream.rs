//! Incremental frame-by-frame decoding.
//!
//! [`ArstStream`] replays the batch forward pass one row at a time.
//! Attention keys and values are append-only caches indexed by position,
//! so pushing a frame costs `O(W)` attention work plus the fixed per-row
//! projection cost, independent of how many frames came before. Every
//! per-row operation reproduces the batch kernels' reduction order, so
//! streaming logits are bit-identical to a teacher-forced forward pass fed
//! the same tokens.
//!
//! Speculation is supported by length marks: [`StreamModel::mark`] records
//! the current frame count and [`StreamModel::rewind`] truncates all
//! caches back to a mark, which makes lookahead-and-rollback loops cheap.

use crate::error::{ArstError, Result};
use crate::model::{
    logits_to_probs, phase_embed, positional_encoding, LinearParams, ModelConfig, ModelParams,
    PhaseToken,
};
use crate::numerics::{layer_norm_row, Scalar};

/// Logits and probabilities for one decoded frame.
#[derive(Debug, Clone)]
pub struct StepOutput<T> {
    pub logits: Vec<T>,
    pub probs: Vec<T>,
}

/// A causal sequence classifier consumed one frame at a time.
///
/// `mark` / `rewind` expose snapshot semantics: a mark is the number of
/// frames consumed, and rewinding to a mark discards every frame pushed
/// after it. Rewinding never changes the outputs of frames that remain.
pub trait StreamModel<T: Scalar> {
    /// Number of phase classes in the output distribution.
    fn class_count(&self) -> usize;

    /// Consumes the next frame. `fed` is the decoder input token for this
    /// position: the start token for the first frame, then the committed
    /// phase of the previous frame (or a speculative substitute).
    fn push_frame(&mut self, feature: &[T], fed: PhaseToken) -> Result<StepOutput<T>>;

    /// Number of frames consumed so far.
    fn mark(&self) -> usize;

    /// Discards all frames after `mark`.
    fn rewind(&mut self, mark: usize) -> Result<()>;
}

/// Growable matrix of per-position rows backing one attention cache.
#[derive(Debug, Clone)]
struct RowCache<T> {
    cols: usize,
    rows: usize,
    data: Vec<T>,
}

impl<T: Scalar> RowCache<T> {
    fn new(cols: usize) -> Self {
        RowCache {
            cols,
            rows: 0,
            data: Vec::new(),
        }
    }

    fn push(&mut self, row: &[T]) {
        debug_assert_eq!(row.len(), self.cols);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    fn truncate(&mut self, rows: usize) {
        debug_assert!(rows <= self.rows);
        self.data.truncate(rows * self.cols);
        self.rows = rows;
    }
}

/// Streaming decoder over frozen model parameters.
pub struct ArstStream<'a, T> {
    params: &'a ModelParams<T>,
    cfg: &'a ModelConfig,
    len: usize,
    enc_k: RowCache<T>,
    enc_v: RowCache<T>,
    cross_k: RowCache<T>,
    cross_v: RowCache<T>,
    dec_k: RowCache<T>,
    dec_v: RowCache<T>,
}

/// One row of `x · weight + bias`, accumulated in the same order as the
/// batch matrix product (ascending over the input dimension, bias last).
fn row_linear<T: Scalar>(x: &[T], lin: &LinearParams<T>) -> Vec<T> {
    let w = &lin.weight.value;
    let mut out = vec![T::zero(); w.cols()];
    for (k, &xk) in x.iter().enumerate() {
        for (o, &wkj) in out.iter_mut().zip(w.row(k).iter()) {
            *o = *o + xk * wkj;
        }
    }
    for (o, &b) in out.iter_mut().zip(lin.bias.value.row(0).iter()) {
        *o += b;
    }
    out
}

/// Residual add followed by layer norm, on a single row.
fn residual_norm<T: Scalar>(
    x: &[T],
    sublayer: &[T],
    ln: &crate::model::LayerNormParams<T>,
    eps: T,
) -> Result<Vec<T>> {
    let summed: Vec<T> = x.iter().zip(sublayer.iter()).map(|(&a, &b)| a + b).collect();
    let mut out = vec![T::zero(); summed.len()];
    let mut xhat = vec![T::zero(); summed.len()];
    layer_norm_row(
        &summed,
        ln.gain.value.row(0),
        ln.bias.value.row(0),
        eps,
        &mut out,
        &mut xhat,
    )?;
    Ok(out)
}

/// Position-wise feed-forward block on a single row.
fn ffn_row<T: Scalar>(x: &[T], ffn: &crate::model::FeedForwardParams<T>) -> Vec<T> {
    let mut act = row_linear(x, &ffn.hidden);
    for v in &mut act {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    row_linear(&act, &ffn.output)
}

impl<'a, T: Scalar> ArstStream<'a, T> {
    pub fn new(params: &'a ModelParams<T>, cfg: &'a ModelConfig) -> Result<Self> {
        cfg.validate()?;
        params.validate_shapes(cfg)?;
        Ok(ArstStream {
            params,
            cfg,
            len: 0,
            enc_k: RowCache::new(cfg.d_model),
            enc_v: RowCache::new(cfg.d_model),
            cross_k: RowCache::new(cfg.d_model),
            cross_v: RowCache::new(cfg.d_model),
            dec_k: RowCache::new(cfg.d_model),
            dec_v: RowCache::new(cfg.d_model),
        })
    }

    /// Multi-head banded attention for a single query row against cached
    /// keys/values over the window `lo..=hi`.
    fn attention_row(
        &self,
        q_row: &[T],
        keys: &RowCache<T>,
        values: &RowCache<T>,
        lo: usize,
        hi: usize,
        output: &LinearParams<T>,
    ) -> Vec<T> {
        let cfg = self.cfg;
        let dh = cfg.d_head();
        let scale = T::from_f64(1.0 / (dh as f64).sqrt());
        let mut concat = vec![T::zero(); cfg.d_model];
        let mut scores = Vec::with_capacity(hi - lo + 1);
        for h in 0..cfg.n_heads {
            let off = h * dh;
            let qh = &q_row[off..off + dh];
            scores.clear();
            for s in lo..=hi {
                let kh = &keys.row(s)[off..off + dh];
                let mut acc = T::zero();
                for (&a, &b) in qh.iter().zip(kh.iter()) {
                    acc = acc + a * b;
                }
                scores.push(acc * scale);
            }
            // Stable softmax over the window, ascending like the batch one.
            let mut max = scores[0];
            for &v in &scores[1..] {
                if v > max {
                    max = v;
                }
            }
            let mut sum = T::zero();
            for v in &mut scores {
                let e = (*v - max).exp();
                *v = e;
                sum += e;
            }
            for v in &mut scores {
                *v /= sum;
            }
            for (si, s) in (lo..=hi).enumerate() {
                let p = scores[si];
                let vh = &values.row(s)[off..off + dh];
                for (c, &vv) in concat[off..off + dh].iter_mut().zip(vh.iter()) {
                    *c = *c + p * vv;
                }
            }
        }
        row_linear(&concat, output)
    }

    /// Window of positions attended by position `pos` (0-based, inclusive).
    fn window(&self, pos: usize) -> (usize, usize) {
        (pos.saturating_sub(self.cfg.band_width), pos)
    }
}

impl<'a, T: Scalar> StreamModel<T> for ArstStream<'a, T> {
    fn class_count(&self) -> usize {
        self.cfg.classes
    }

    fn push_frame(&mut self, feature: &[T], fed: PhaseToken) -> Result<StepOutput<T>> {
        let cfg = self.cfg;
        let params = self.params;
        if feature.len() != cfg.d_feat {
            return Err(ArstError::shape(
                "stream feature",
                (1, feature.len()),
                (1, cfg.d_feat),
            ));
        }
        let pos = self.len;
        match fed {
            PhaseToken::Bos if pos != 0 => {
                return Err(ArstError::Invariant(format!(
                    "start token fed at stream position {pos}"
                )))
            }
            PhaseToken::Phase(_) if pos == 0 => {
                return Err(ArstError::Invariant(
                    "first frame must be fed the start token".into(),
                ))
            }
            PhaseToken::Phase(id) if id == 0 || id as usize > cfg.classes => {
                return Err(ArstError::PhaseId {
                    id,
                    classes: cfg.classes as u32,
                });
            }
            _ => {}
        }
        let eps = T::from_f64(cfg.ln_eps);
        let (lo, hi) = self.window(pos);

        // Encoder row: projected feature plus positional encoding, banded
        // self-attention over cached encoder keys, then the two residual
        // norms around attention and feed-forward.
        let mut x = row_linear(feature, &params.input_proj);
        for (v, p) in x.iter_mut().zip(positional_encoding::<T>(pos, cfg)) {
            *v += p;
        }
        let q = row_linear(&x, &params.encoder.self_attn.query);
        let k = row_linear(&x, &params.encoder.self_attn.key);
        let v = row_linear(&x, &params.encoder.self_attn.value);
        self.enc_k.push(&k);
        self.enc_v.push(&v);
        let attn = self.attention_row(
            &q,
            &self.enc_k,
            &self.enc_v,
            lo,
            hi,
            &params.encoder.self_attn.output,
        );
        let x1 = residual_norm(&x, &attn, &params.encoder.norm1, eps)?;
        let ffn_out = ffn_row(&x1, &params.encoder.ffn);
        let enc_out = residual_norm(&x1, &ffn_out, &params.encoder.norm2, eps)?;
        // Cross-attention keys/values depend only on the encoder output, so
        // they are computed once per position and cached.
        let ck = row_linear(&enc_out, &params.decoder.cross_attn.key);
        let cv = row_linear(&enc_out, &params.decoder.cross_attn.value);
        self.cross_k.push(&ck);
        self.cross_v.push(&cv);

        // Decoder row: embedded fed token plus positional encoding, banded
        // self-attention, banded cross-attention, feed-forward, head.
        let emb = phase_embed::<T>(fed, cfg)?;
        let e: Vec<T> = emb
            .iter()
            .zip(positional_encoding::<T>(pos, cfg))
            .map(|(&a, b)| a + b)
            .collect();
        let dq = row_linear(&e, &params.decoder.self_attn.query);
        let dk = row_linear(&e, &params.decoder.self_attn.key);
        let dv = row_linear(&e, &params.decoder.self_attn.value);
        self.dec_k.push(&dk);
        self.dec_v.push(&dv);
        let self_out = self.attention_row(
            &dq,
            &self.dec_k,
            &self.dec_v,
            lo,
            hi,
            &params.decoder.self_attn.output,
        );
        let y1 = residual_norm(&e, &self_out, &params.decoder.norm1, eps)?;
        let cq = row_linear(&y1, &params.decoder.cross_attn.query);
        let cross_out = self.attention_row(
            &cq,
            &self.cross_k,
            &self.cross_v,
            lo,
            hi,
            &params.decoder.cross_attn.output,
        );
        let y2 = residual_norm(&y1, &cross_out, &params.decoder.norm2, eps)?;
        let ffn2_out = ffn_row(&y2, &params.decoder.ffn);
        let y3 = residual_norm(&y2, &ffn2_out, &params.decoder.norm3, eps)?;
        let logits = row_linear(&y3, &params.head);
        if logits.iter().any(|v| !v.is_finite()) {
            return Err(ArstError::Numeric(format!(
                "non-finite logits at stream position {pos}"
            )));
        }
        let probs = logits_to_probs(&logits)?;
        self.len += 1;
        Ok(StepOutput { logits, probs })
    }

    fn mark(&self) -> usize {
        self.len
    }

    fn rewind(&mut self, mark: usize) -> Result<()> {
        if mark > self.len {
            return Err(ArstError::Invariant(format!(
                "cannot rewind to {mark}: only {} frames consumed",
                self.len
            )));
        }
        self.enc_k.truncate(mark);
        self.enc_v.truncate(mark);
        self.cross_k.truncate(mark);
        self.cross_v.truncate(mark);
        self.dec_k.truncate(mark);
        self.dec_v.truncate(mark);
        self.len = mark;
        Ok(())
    }
}

/// Test double that ignores its inputs and plays back a fixed phase
/// script, emitting a one-hot distribution for each position. Useful for
/// exercising commit/lookahead logic in isolation from the network.
#[derive(Debug, Clone)]
pub struct ScriptedModel {
    script: Vec<u32>,
    classes: usize,
    pos: usize,
}

impl ScriptedModel {
    pub fn new(script: Vec<u32>, classes: usize) -> Result<Self> {
        for &s in &script {
            if s == 0 || s as usize > classes {
                return Err(ArstError::PhaseId {
                    id: s,
                    classes: classes as u32,
                });
            }
        }
        Ok(ScriptedModel {
            script,
            classes,
            pos: 0,
        })
    }

    pub fn script_len(&self) -> usize {
        self.script.len()
    }
}

impl<T: Scalar> StreamModel<T> for ScriptedModel {
    fn class_count(&self) -> usize {
        self.classes
    }

    fn push_frame(&mut self, _feature: &[T], _fed: PhaseToken) -> Result<StepOutput<T>> {
        if self.pos >= self.script.len() {
            return Err(ArstError::Invariant(format!(
                "scripted stream exhausted after {} frames",
                self.script.len()
            )));
        }
        let phase = self.script[self.pos] as usize - 1;
        let mut logits = vec![T::zero(); self.classes];
        logits[phase] = T::from_f64(1.0);
        let mut probs = vec![T::zero(); self.classes];
        probs[phase] = T::one();
        self.pos += 1;
        Ok(StepOutput { logits, probs })
    }

    fn mark(&self) -> usize {
        self.pos
    }

    fn rewind(&mut self, mark: usize) -> Result<()> {
        if mark > self.pos {
            return Err(ArstError::Invariant(format!(
                "cannot rewind scripted stream to {mark} from {}",
                self.pos
            )));
        }
        self.pos = mark;
        Ok(())
    }
}
