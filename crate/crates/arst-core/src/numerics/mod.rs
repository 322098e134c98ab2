//! Dense numerics: matrices, parameters, RNG, and gradient checking.

mod gradcheck;
mod matrix;
mod rng;
mod scalar;

pub use gradcheck::{check_gradients, GradCheckReport, Parameterized};
pub use matrix::{layer_norm, masked_softmax_backward, masked_softmax_rows, Matrix, Parameter};
pub(crate) use matrix::{layer_norm_row, layer_norm_row_backward};
pub use rng::SeededRng;
pub use scalar::Scalar;
