//! Crate-wide error type.
//!
//! Every fallible operation in this crate returns [`crate::Result`]. The
//! variants are grouped by failure domain so that callers (notably the CLI)
//! can map them onto distinct exit codes without string matching.

/// Errors produced by any module in this crate.
#[derive(Debug, thiserror::Error)]
pub enum ArstError {
    /// Two tensors (or a tensor and an expected shape) do not line up.
    #[error("shape mismatch in {op}: left is {lhs}, right is {rhs}")]
    Shape {
        /// Operation that failed, e.g. `matmul`.
        op: &'static str,
        /// Shape of the left operand, formatted `rows x cols`.
        lhs: String,
        /// Shape of the right operand or the expected shape.
        rhs: String,
    },

    /// A configuration value is out of range or internally inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A phase id is outside the valid `1..=classes` range.
    #[error("invalid phase id {id}: expected 1..={classes}")]
    PhaseId {
        /// Offending id.
        id: u32,
        /// Number of phase classes in effect.
        classes: u32,
    },

    /// A numeric computation produced a non-finite value.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A file on disk does not follow the expected binary or text layout.
    #[error("malformed file {path}: {reason}")]
    Format {
        /// Path of the offending file.
        path: String,
        /// What was wrong with it.
        reason: String,
    },

    /// Prediction and ground-truth sequences cannot be compared.
    #[error("sequence length mismatch: predictions have {pred} frames, ground truth has {gt}")]
    LengthMismatch {
        /// Number of predicted frames.
        pred: usize,
        /// Number of ground-truth frames.
        gt: usize,
    },

    /// An internal invariant was violated; indicates a bug in this crate.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ArstError {
    /// Shorthand constructor for [`ArstError::Shape`].
    pub fn shape(op: &'static str, lhs: (usize, usize), rhs: (usize, usize)) -> Self {
        ArstError::Shape {
            op,
            lhs: format!("{}x{}", lhs.0, lhs.1),
            rhs: format!("{}x{}", rhs.0, rhs.1),
        }
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, ArstError>;
