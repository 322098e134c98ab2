//! Command implementations and exit-code policy for the `arst` binary.
//!
//! Exit codes: 0 success, 2 configuration problems, 3 numeric failures
//! during training, 4 malformed or mismatched files, 5 evaluation length
//! mismatches, 1 internal invariant violations.

pub mod commands;

pub use commands::{
    cmd_eval, cmd_gen, cmd_infer, cmd_sweep_w, cmd_train, render_sweep_table, train_on_videos,
    EvalReport, GenSummary, InferOptions, InferReport, InferSummary, ReportVideo, SweepRow,
    TrainSummary,
};

use arst_core::ArstError;

/// Maps an error to the documented process exit code.
pub fn exit_code(err: &ArstError) -> i32 {
    match err {
        ArstError::Config(_) | ArstError::PhaseId { .. } => 2,
        ArstError::Numeric(_) => 3,
        ArstError::Shape { .. } | ArstError::Format { .. } | ArstError::Io(_) => 4,
        ArstError::LengthMismatch { .. } => 5,
        ArstError::Invariant(_) => 1,
    }
}
