//! Online decoding: greedy auto-regressive commitment plus an optional
//! transition-confirmation pass, with per-frame latency accounting.
//!
//! The confirmation pass treats a predicted phase change at frame `t` as
//! provisional: the decoder speculatively consumes the next `n` frames
//! while still feeding the previous phase, and the change is committed
//! only if all of those lookahead predictions agree with it; otherwise the
//! previous phase is kept for frame `t`. Near the end of the stream the
//! horizon shrinks to the frames that remain.

mod bench;
mod stream;

pub use bench::{bench_latency, summarize_latencies, LatencyReport};
pub use stream::{ArstStream, ScriptedModel, StepOutput, StreamModel};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{ArstError, Result};
use crate::model::{argmax_phase, ModelConfig, ModelParams, PhaseToken};
use crate::numerics::{Matrix, Scalar};

/// Transition-confirmation settings.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields, default)]
pub struct CciConfig {
    pub enabled: bool,
    /// Number of lookahead frames that must unanimously confirm a
    /// predicted phase change.
    pub n: usize,
}

impl Default for CciConfig {
    fn default() -> Self {
        CciConfig {
            enabled: true,
            n: 10,
        }
    }
}

impl CciConfig {
    pub fn disabled() -> Self {
        CciConfig {
            enabled: false,
            n: 10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(ArstError::Config(
                "confirmation horizon n must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// An accepted phase change and how long its confirmation took.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionRecord {
    /// 1-based frame index where the new phase was committed.
    pub frame: usize,
    /// Lookahead frames consumed before committing (0 near stream end).
    pub delay: usize,
}

/// Output of one decoded stream.
#[derive(Debug, Clone)]
pub struct StreamResult<T> {
    /// Committed phase per frame (1-based ids).
    pub committed: Vec<u32>,
    /// Greedy probability vector per frame. Rows keep the original
    /// distribution even when the committed label was overridden.
    pub probs: Matrix<T>,
    /// Wall-clock cost of each frame's decision, including any lookahead
    /// spent confirming a transition at that frame.
    pub latencies_ms: Vec<f64>,
    /// Accepted transitions with their confirmation delays.
    pub accepted_transitions: Vec<TransitionRecord>,
}

impl<T> StreamResult<T> {
    pub fn frames(&self) -> usize {
        self.committed.len()
    }

    /// Number of committed phase changes.
    pub fn committed_transition_count(&self) -> usize {
        self.committed.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

/// Read-only random access to frame feature vectors.
///
/// Abstracting the frame store lets tests observe exactly which frames the
/// decoding loop touches.
pub trait FrameSource<T> {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// 0-based frame lookup.
    fn frame(&self, index: usize) -> Result<&[T]>;
}

impl<T: Scalar> FrameSource<T> for Matrix<T> {
    fn len(&self) -> usize {
        self.rows()
    }

    fn frame(&self, index: usize) -> Result<&[T]> {
        if index >= self.rows() {
            return Err(ArstError::Invariant(format!(
                "frame {index} out of range for {}-frame stream",
                self.rows()
            )));
        }
        Ok(self.row(index))
    }
}

/// Decodes a whole stream through `model`.
///
/// Frames are numbered 1-based. Frame 1 always commits its greedy argmax.
/// For later frames the greedy prediction is committed directly unless it
/// differs from the previous committed phase and confirmation is enabled;
/// then the change must survive the lookahead vote described in the module
/// docs. Speculative lookahead state is always rolled back, and the next
/// frame is fed the committed (not the raw greedy) phase.
pub fn run_stream<T, M, F>(model: &mut M, frames: &F, cci: &CciConfig) -> Result<StreamResult<T>>
where
    T: Scalar,
    M: StreamModel<T>,
    F: FrameSource<T> + ?Sized,
{
    cci.validate()?;
    let total = frames.len();
    if total == 0 {
        return Err(ArstError::Invariant("empty frame stream".into()));
    }
    if model.mark() != 0 {
        return Err(ArstError::Invariant(format!(
            "stream model already consumed {} frames",
            model.mark()
        )));
    }
    let classes = model.class_count();
    let mut committed: Vec<u32> = Vec::with_capacity(total);
    let mut probs = Matrix::zeros(total, classes);
    let mut latencies_ms = Vec::with_capacity(total);
    let mut accepted_transitions = Vec::new();

    for t in 1..=total {
        let started = Instant::now();
        let fed = match committed.last() {
            None => PhaseToken::Bos,
            Some(&prev) => PhaseToken::Phase(prev),
        };
        let out = model.push_frame(frames.frame(t - 1)?, fed)?;
        if out.probs.len() != classes {
            return Err(ArstError::shape(
                "stream probabilities",
                (1, out.probs.len()),
                (1, classes),
            ));
        }
        let greedy = argmax_phase(&out.probs);
        probs.row_mut(t - 1).copy_from_slice(&out.probs);

        let label = match committed.last() {
            Some(&prev) if cci.enabled && greedy != prev => {
                let horizon = cci.n.min(total - t);
                let snapshot = model.mark();
                let mut confirmed = true;
                for j in 1..=horizon {
                    let ahead =
                        model.push_frame(frames.frame(t - 1 + j)?, PhaseToken::Phase(prev))?;
                    if argmax_phase(&ahead.probs) != greedy {
                        confirmed = false;
                        break;
                    }
                }
                model.rewind(snapshot)?;
                if confirmed {
                    accepted_transitions.push(TransitionRecord {
                        frame: t,
                        delay: horizon,
                    });
                    greedy
                } else {
                    prev
                }
            }
            _ => greedy,
        };
        committed.push(label);
        latencies_ms.push(started.elapsed().as_secs_f64() * 1e3);
    }

    Ok(StreamResult {
        committed,
        probs,
        latencies_ms,
        accepted_transitions,
    })
}

/// Convenience wrapper: streams `features` through a fresh decoder over
/// frozen parameters.
pub fn run_arst_stream<T: Scalar>(
    params: &ModelParams<T>,
    cfg: &ModelConfig,
    cci: &CciConfig,
    features: &Matrix<T>,
) -> Result<StreamResult<T>> {
    let mut stream = ArstStream::new(params, cfg)?;
    run_stream(&mut stream, features, cci)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::SeededRng;

    fn zero_frames(n: usize) -> Matrix<f64> {
        Matrix::zeros(n, 1)
    }

    fn decode(script: &[u32], classes: usize, cci: &CciConfig) -> Vec<u32> {
        let mut stub = ScriptedModel::new(script.to_vec(), classes).unwrap();
        let frames = zero_frames(script.len());
        run_stream(&mut stub, &frames, cci).unwrap().committed
    }

    #[test]
    fn single_frame_blip_is_suppressed() {
        let cci = CciConfig { enabled: true, n: 2 };
        let committed = decode(&[1, 1, 2, 1, 1], 3, &cci);
        assert_eq!(committed, vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn confirmed_transition_is_accepted() {
        let cci = CciConfig { enabled: true, n: 2 };
        let mut stub = ScriptedModel::new(vec![1, 1, 2, 2, 2, 2], 3).unwrap();
        let frames = zero_frames(6);
        let result = run_stream(&mut stub, &frames, &cci).unwrap();
        assert_eq!(result.committed, vec![1, 1, 2, 2, 2, 2]);
        assert_eq!(
            result.accepted_transitions,
            vec![TransitionRecord { frame: 3, delay: 2 }]
        );
    }

    #[test]
    fn no_transitions_means_greedy_equals_confirmed() {
        let cci = CciConfig { enabled: true, n: 4 };
        let script = vec![2; 9];
        assert_eq!(decode(&script, 3, &cci), script);
    }

    #[test]
    fn disabled_confirmation_is_pure_greedy() {
        let script = vec![1, 2, 1, 3, 3, 1];
        let committed = decode(&script, 3, &CciConfig::disabled());
        assert_eq!(committed, script);
    }

    #[test]
    fn stream_end_confirms_with_remaining_frames() {
        // Transition at the second-to-last frame: only one lookahead frame
        // exists, and it agrees, so the change is accepted with delay 1.
        let cci = CciConfig { enabled: true, n: 10 };
        let mut stub = ScriptedModel::new(vec![1, 1, 1, 2, 2], 3).unwrap();
        let frames = zero_frames(5);
        let result = run_stream(&mut stub, &frames, &cci).unwrap();
        assert_eq!(result.committed, vec![1, 1, 1, 2, 2]);
        assert_eq!(
            result.accepted_transitions,
            vec![TransitionRecord { frame: 4, delay: 1 }]
        );

        // Transition exactly at the last frame: the horizon is empty and
        // the change is accepted vacuously.
        let committed = decode(&[1, 1, 1, 1, 2], 3, &cci);
        assert_eq!(committed, vec![1, 1, 1, 1, 2]);
    }

    #[test]
    fn rejected_transition_keeps_original_probabilities() {
        let cci = CciConfig { enabled: true, n: 3 };
        let mut stub = ScriptedModel::new(vec![1, 2, 1, 1, 1], 3).unwrap();
        let frames = zero_frames(5);
        let result = run_stream(&mut stub, &frames, &cci).unwrap();
        assert_eq!(result.committed, vec![1, 1, 1, 1, 1]);
        // Frame 2's distribution still says phase 2 even though phase 1
        // was committed.
        assert_eq!(result.probs[(1, 1)], 1.0);
        assert_eq!(result.probs[(1, 0)], 0.0);
        assert!(result.accepted_transitions.is_empty());
    }

    #[test]
    fn first_frame_always_commits_greedy() {
        let cci = CciConfig { enabled: true, n: 5 };
        for script in [vec![3, 1, 1, 1, 1, 1], vec![2, 3, 1, 2, 3, 1]] {
            let committed = decode(&script, 3, &cci);
            assert_eq!(committed[0], script[0]);
        }
    }

    #[test]
    fn result_shape_invariants_hold() {
        let cci = CciConfig::default();
        let mut rng = SeededRng::new(31);
        let script: Vec<u32> = (0..40).map(|_| rng.next_below(3) as u32 + 1).collect();
        let mut stub = ScriptedModel::new(script.clone(), 3).unwrap();
        let frames = zero_frames(script.len());
        let result = run_stream(&mut stub, &frames, &cci).unwrap();
        assert_eq!(result.frames(), script.len());
        assert_eq!(result.probs.rows(), script.len());
        assert_eq!(result.latencies_ms.len(), script.len());
    }

    #[test]
    fn invalid_configs_and_streams_are_rejected() {
        assert!(CciConfig { enabled: true, n: 0 }.validate().is_err());
        let mut stub = ScriptedModel::new(vec![1, 1], 3).unwrap();
        let empty = zero_frames(0);
        assert!(run_stream::<f64, _, _>(&mut stub, &empty, &CciConfig::default()).is_err());

        // A partially consumed model cannot start a new stream run.
        let mut used = ScriptedModel::new(vec![1, 1, 1], 3).unwrap();
        StreamModel::<f64>::push_frame(&mut used, &[0.0], PhaseToken::Bos).unwrap();
        let frames = zero_frames(2);
        assert!(run_stream::<f64, _, _>(&mut used, &frames, &CciConfig::default()).is_err());
    }
}
