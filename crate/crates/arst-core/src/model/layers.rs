//! Shared layer building blocks: linear maps, residual layer norms, and
//! the position-wise feed-forward block, each with forward and backward
//! passes. Backward passes accumulate into `Parameter::grad` with `+=`
//! and return the gradient with respect to the block input.

use crate::error::Result;
use crate::model::params::{FeedForwardParams, LayerNormParams, LinearParams};
use crate::numerics::{layer_norm_row, layer_norm_row_backward, Matrix, Scalar};

/// Forward `x · weight + bias`.
pub fn linear_forward<T: Scalar>(x: &Matrix<T>, lin: &LinearParams<T>) -> Result<Matrix<T>> {
    let mut y = x.matmul(&lin.weight.value)?;
    y.add_row_broadcast(lin.bias.value.row(0))?;
    Ok(y)
}

/// Backward of [`linear_forward`]: accumulates `dW += xᵀ·dy`,
/// `db += column sums of dy`, and returns `dx = dy · Wᵀ`.
pub fn linear_backward<T: Scalar>(
    x: &Matrix<T>,
    lin: &mut LinearParams<T>,
    dy: &Matrix<T>,
) -> Result<Matrix<T>> {
    lin.weight.grad.add_assign(&x.transpose_matmul(dy)?)?;
    lin.bias.grad.add_assign(&dy.column_sums())?;
    dy.matmul_transpose(&lin.weight.value)
}

/// Cache produced by [`layer_norm_rows_forward`].
#[derive(Debug, Clone)]
pub struct LayerNormCache<T> {
    /// Normalized pre-affine values, one row per input row.
    pub xhat: Matrix<T>,
    /// Per-row `1 / sqrt(var + eps)`.
    pub inv_std: Vec<T>,
}

/// Applies layer norm to every row of `x`.
pub fn layer_norm_rows_forward<T: Scalar>(
    x: &Matrix<T>,
    ln: &LayerNormParams<T>,
    eps: T,
) -> Result<(Matrix<T>, LayerNormCache<T>)> {
    let mut out = Matrix::zeros(x.rows(), x.cols());
    let mut xhat = Matrix::zeros(x.rows(), x.cols());
    let mut inv_std = vec![T::zero(); x.rows()];
    for i in 0..x.rows() {
        // Split borrows: rows of distinct matrices.
        let o = out.row_mut(i);
        let h = xhat.row_mut(i);
        inv_std[i] = layer_norm_row(
            x.row(i),
            ln.gain.value.row(0),
            ln.bias.value.row(0),
            eps,
            o,
            h,
        )?;
    }
    Ok((out, LayerNormCache { xhat, inv_std }))
}

/// Backward of [`layer_norm_rows_forward`]; returns `dx`.
pub fn layer_norm_rows_backward<T: Scalar>(
    cache: &LayerNormCache<T>,
    ln: &mut LayerNormParams<T>,
    dy: &Matrix<T>,
) -> Result<Matrix<T>> {
    let mut dx = Matrix::zeros(dy.rows(), dy.cols());
    for i in 0..dy.rows() {
        layer_norm_row_backward(
            cache.xhat.row(i),
            cache.inv_std[i],
            ln.gain.value.row(0),
            dy.row(i),
            dx.row_mut(i),
            ln.gain.grad.row_mut(0),
            ln.bias.grad.row_mut(0),
        );
    }
    Ok(dx)
}

/// Cache produced by [`ffn_forward`].
#[derive(Debug, Clone)]
pub struct FfnCache<T> {
    /// Block input.
    pub x: Matrix<T>,
    /// Hidden pre-activation (before ReLU).
    pub pre: Matrix<T>,
    /// Hidden post-activation (after ReLU).
    pub act: Matrix<T>,
}

/// Position-wise feed-forward block: `relu(x·W1 + b1)·W2 + b2`.
pub fn ffn_forward<T: Scalar>(
    x: &Matrix<T>,
    ffn: &FeedForwardParams<T>,
) -> Result<(Matrix<T>, FfnCache<T>)> {
    let pre = linear_forward(x, &ffn.hidden)?;
    let mut act = pre.clone();
    for v in act.data_mut() {
        if *v < T::zero() {
            *v = T::zero();
        }
    }
    let y = linear_forward(&act, &ffn.output)?;
    Ok((
        y,
        FfnCache {
            x: x.clone(),
            pre,
            act,
        },
    ))
}

/// Backward of [`ffn_forward`]; returns `dx`.
pub fn ffn_backward<T: Scalar>(
    cache: &FfnCache<T>,
    ffn: &mut FeedForwardParams<T>,
    dy: &Matrix<T>,
) -> Result<Matrix<T>> {
    let mut dact = linear_backward(&cache.act, &mut ffn.output, dy)?;
    for (g, &p) in dact.data_mut().iter_mut().zip(cache.pre.data().iter()) {
        if p <= T::zero() {
            *g = T::zero();
        }
    }
    linear_backward(&cache.x, &mut ffn.hidden, &dact)
}
