//! Floating-point abstraction over `f32` and `f64`.

use num_traits::Float;

/// Element type for all matrices and model parameters.
///
/// The crate runs in 32-bit precision by default; verification code (most
/// importantly finite-difference gradient checks, which are unreliable at
/// 32-bit) instantiates the same generic code with `f64`.
pub trait Scalar:
    Float
    + std::ops::AddAssign
    + std::ops::SubAssign
    + std::ops::MulAssign
    + std::ops::DivAssign
    + std::iter::Sum
    + std::fmt::Debug
    + std::fmt::Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts from `f64`, rounding to the target precision.
    fn from_f64(v: f64) -> Self;

    /// Widens to `f64` exactly (both supported types embed into `f64`).
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    fn from_f64(v: f64) -> Self {
        v as f32
    }

    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(self) -> f64 {
        self
    }
}
