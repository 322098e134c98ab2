//! Library-level command implementations.
//!
//! Each command is a plain function over paths and options so tests can
//! call them in-process; the binary in `main.rs` only parses arguments,
//! forwards them here, and maps errors to exit codes.

mod eval;
mod gen;
mod infer;
mod sweep;
mod train;

pub use eval::{cmd_eval, EvalReport, ReportVideo};
pub use gen::{cmd_gen, GenSummary};
pub use infer::{cmd_infer, InferOptions, InferReport, InferSummary};
pub use sweep::{cmd_sweep_w, render_sweep_table, SweepRow};
pub use train::{cmd_train, train_on_videos, TrainSummary};
