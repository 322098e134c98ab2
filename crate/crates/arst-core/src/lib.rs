//! Online surgical-workflow phase recognition.
//!
//! This crate implements a lightweight encoder–decoder transformer that
//! assigns a workflow phase to every frame of a feature stream as it
//! arrives, without looking at unbounded future context:
//!
//! * [`numerics`] — dense matrix kernels with hand-written backward passes,
//!   a deterministic seeded RNG, and a finite-difference gradient checker.
//! * [`model`] — the banded-attention encoder–decoder: configuration,
//!   parameters, masking, embeddings, and the teacher-forced forward and
//!   backward passes.
//! * [`training`] — cross-entropy loss, Adam, and a deterministic
//!   whole-video training loop.
//! * [`inference`] — incremental auto-regressive decoding with per-frame
//!   caches, plus a consistency filter that confirms phase transitions
//!   against a short lookahead before committing them.
//! * [`synthdata`] — a seeded Markov workflow simulator that produces
//!   feature/label sequences for training and verification.
//! * [`metrics`] — frame accuracy, per-phase precision/recall/Jaccard,
//!   aggregation across videos, and an SVG timeline export.
//! * [`formats`] — binary feature/checkpoint files, label files,
//!   prediction CSVs, dataset directories, and the run configuration.
//!
//! All computations are generic over [`numerics::Scalar`] so the same code
//! runs in 64-bit mode (training and verification, where finite-difference
//! comparisons need the extra precision) and 32-bit mode (checkpoints and
//! deployment decoding). Determinism is a design goal throughout: fixed
//! seeds produce bit-identical parameters, predictions, and files.

pub mod error;
pub mod formats;
pub mod inference;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod synthdata;
pub mod training;

pub use error::{ArstError, Result};
pub use numerics::{Matrix, Parameter, Scalar, SeededRng};
