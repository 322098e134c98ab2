//! Token embedding and positional encoding for the decoder and encoder
//! input streams.

use crate::error::{ArstError, Result};
use crate::model::ModelConfig;
use crate::numerics::Scalar;

/// A token fed to the decoder: either the start-of-sequence marker or a
/// committed phase label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseToken {
    /// Start token occupying decoder position 0; embeds to the zero
    /// vector.
    Bos,
    /// A 1-based phase id in `1..=classes`.
    Phase(u32),
}

impl std::fmt::Display for PhaseToken {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PhaseToken::Bos => write!(f, "BOS"),
            PhaseToken::Phase(p) => write!(f, "P{p}"),
        }
    }
}

/// Start index of 1-based segment `k` when `d` entries are split into `c`
/// contiguous segments, the first `d % c` of which are one entry longer.
fn segment_start(k: usize, d: usize, c: usize) -> usize {
    let base = d / c;
    let longer = d % c;
    (k - 1) * base + (k - 1).min(longer)
}

/// Binary segment embedding of a phase token.
///
/// The `d_model` entries are divided into `classes` contiguous segments;
/// phase `i` embeds as ones exactly over segment `i` and zeros elsewhere,
/// and the start token embeds as the all-zero vector. Distinct phases
/// therefore occupy disjoint coordinates, keeping their embeddings well
/// separated without any learned table.
pub fn phase_embed<T: Scalar>(token: PhaseToken, cfg: &ModelConfig) -> Result<Vec<T>> {
    let mut out = vec![T::zero(); cfg.d_model];
    match token {
        PhaseToken::Bos => Ok(out),
        PhaseToken::Phase(id) => {
            if id == 0 || id as usize > cfg.classes {
                return Err(ArstError::PhaseId {
                    id,
                    classes: cfg.classes as u32,
                });
            }
            let k = id as usize;
            let start = segment_start(k, cfg.d_model, cfg.classes);
            let end = segment_start(k + 1, cfg.d_model, cfg.classes);
            for v in &mut out[start..end] {
                *v = T::one();
            }
            Ok(out)
        }
    }
}

/// Sinusoidal positional encoding for position `t` (0-based).
///
/// Entry `2i` is `sin(t / base^(2i / d_model))` and entry `2i + 1` is
/// `cos` of the same angle. Values are computed in `f64` and rounded
/// once, so the batched and streaming code paths see identical bits.
pub fn positional_encoding<T: Scalar>(t: usize, cfg: &ModelConfig) -> Vec<T> {
    let d = cfg.d_model;
    let mut out = vec![T::zero(); d];
    for i in 0..(d + 1) / 2 {
        let exponent = (2 * i) as f64 / d as f64;
        let angle = t as f64 / cfg.pe_base.powf(exponent);
        out[2 * i] = T::from_f64(angle.sin());
        if 2 * i + 1 < d {
            out[2 * i + 1] = T::from_f64(angle.cos());
        }
    }
    out
}

/// Converts one row of logits into a probability vector via a stable
/// softmax.
pub fn logits_to_probs<T: Scalar>(logits: &[T]) -> Result<Vec<T>> {
    if logits.is_empty() {
        return Err(ArstError::Invariant("empty logits row".into()));
    }
    let mut max = logits[0];
    for &v in &logits[1..] {
        if v > max {
            max = v;
        }
    }
    let mut out = vec![T::zero(); logits.len()];
    let mut sum = T::zero();
    for (o, &v) in out.iter_mut().zip(logits.iter()) {
        let e = (v - max).exp();
        *o = e;
        sum += e;
    }
    if !sum.is_finite() || !(sum > T::zero()) {
        return Err(ArstError::Numeric(format!(
            "softmax over logits produced sum {sum}"
        )));
    }
    for o in &mut out {
        *o /= sum;
    }
    Ok(out)
}

/// Index of the largest probability; ties resolve to the lowest phase id.
/// Returns a 1-based phase id.
pub fn argmax_phase<T: Scalar>(probs: &[T]) -> u32 {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best as u32 + 1
}
