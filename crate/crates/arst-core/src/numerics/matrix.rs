//! Dense row-major matrices and the numeric kernels built on them.
//!
//! The matrix type is deliberately small: storage plus the handful of
//! operations the model actually needs, each with a matching analytic
//! backward pass where training requires one. Loops accumulate in a fixed
//! ascending order so that batch and incremental code paths performing the
//! same mathematical reduction produce bit-identical results.

use crate::error::{ArstError, Result};
use crate::numerics::Scalar;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    /// Zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    /// Builds a matrix from row-major data; the length must match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(ArstError::Invariant(format!(
                "matrix data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Shape as `(rows, cols)`.
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Row `i` as a mutable slice.
    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Full row-major backing slice.
    pub fn data(&self) -> &[T] {
        &self.data
    }

    /// Full mutable row-major backing slice.
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Total number of entries.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    /// True when the matrix has no entries.
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Matrix product `self · other`.
    ///
    /// The accumulation order per output entry is ascending `k`, identical
    /// to a naive triple loop, so results are bit-equal to one.
    pub fn matmul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != other.rows {
            return Err(ArstError::shape("matmul", self.shape(), other.shape()));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            for (k, &aik) in a_row.iter().enumerate() {
                let b_row = other.row(k);
                let out_row = out.row_mut(i);
                for (o, &b) in out_row.iter_mut().zip(b_row.iter()) {
                    *o = *o + aik * b;
                }
            }
        }
        Ok(out)
    }

    /// Matrix product `self · otherᵀ` without materializing the transpose.
    pub fn matmul_transpose(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.cols != other.cols {
            return Err(ArstError::shape(
                "matmul_transpose",
                self.shape(),
                other.shape(),
            ));
        }
        let mut out = Matrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = out.row_mut(i);
            for (j, o) in out_row.iter_mut().enumerate() {
                let b_row = other.row(j);
                let mut acc = T::zero();
                for (&a, &b) in a_row.iter().zip(b_row.iter()) {
                    acc = acc + a * b;
                }
                *o = acc;
            }
        }
        Ok(out)
    }

    /// Matrix product `selfᵀ · other` without materializing the transpose.
    pub fn transpose_matmul(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.rows != other.rows {
            return Err(ArstError::shape(
                "transpose_matmul",
                self.shape(),
                other.shape(),
            ));
        }
        let mut out = Matrix::zeros(self.cols, other.cols);
        for k in 0..self.rows {
            let a_row = self.row(k);
            let b_row = other.row(k);
            for (i, &a) in a_row.iter().enumerate() {
                let out_row = out.row_mut(i);
                for (o, &b) in out_row.iter_mut().zip(b_row.iter()) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    /// Transposed copy.
    pub fn transpose(&self) -> Matrix<T> {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    /// Elementwise sum `self + other`.
    pub fn add(&self, other: &Matrix<T>) -> Result<Matrix<T>> {
        if self.shape() != other.shape() {
            return Err(ArstError::shape("add", self.shape(), other.shape()));
        }
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(&a, &b)| a + b)
            .collect();
        Matrix::from_vec(self.rows, self.cols, data)
    }

    /// In-place elementwise add.
    pub fn add_assign(&mut self, other: &Matrix<T>) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(ArstError::shape("add_assign", self.shape(), other.shape()));
        }
        for (a, &b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b;
        }
        Ok(())
    }

    /// In-place multiplication by a scalar.
    pub fn scale(&mut self, s: T) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Adds `row` to every row of the matrix (bias broadcast).
    pub fn add_row_broadcast(&mut self, row: &[T]) -> Result<()> {
        if row.len() != self.cols {
            return Err(ArstError::shape(
                "add_row_broadcast",
                self.shape(),
                (1, row.len()),
            ));
        }
        for i in 0..self.rows {
            for (v, &b) in self.row_mut(i).iter_mut().zip(row.iter()) {
                *v += b;
            }
        }
        Ok(())
    }

    /// Column sums as a `1 x cols` matrix (bias gradient reduction).
    pub fn column_sums(&self) -> Matrix<T> {
        let mut out = Matrix::zeros(1, self.cols);
        for i in 0..self.rows {
            let row = self.row(i);
            for (o, &v) in out.data.iter_mut().zip(row.iter()) {
                *o = *o + v;
            }
        }
        out
    }

    /// Copy of columns `[start, start + len)`.
    pub fn slice_columns(&self, start: usize, len: usize) -> Matrix<T> {
        debug_assert!(start + len <= self.cols);
        let mut out = Matrix::zeros(self.rows, len);
        for i in 0..self.rows {
            out.row_mut(i).copy_from_slice(&self.row(i)[start..start + len]);
        }
        out
    }

    /// Adds `block` into columns `[start, start + block.cols)`.
    pub fn add_into_columns(&mut self, start: usize, block: &Matrix<T>) -> Result<()> {
        if block.rows != self.rows || start + block.cols > self.cols {
            return Err(ArstError::shape(
                "add_into_columns",
                self.shape(),
                block.shape(),
            ));
        }
        for i in 0..self.rows {
            let dst = &mut self.row_mut(i)[start..start + block.cols];
            for (d, &s) in dst.iter_mut().zip(block.row(i).iter()) {
                *d += s;
            }
        }
        Ok(())
    }

    /// Largest absolute entry-wise difference to `other`.
    pub fn max_abs_diff(&self, other: &Matrix<T>) -> Result<T> {
        if self.shape() != other.shape() {
            return Err(ArstError::shape("max_abs_diff", self.shape(), other.shape()));
        }
        let mut worst = T::zero();
        for (&a, &b) in self.data.iter().zip(other.data.iter()) {
            let d = (a - b).abs();
            if d > worst {
                worst = d;
            }
        }
        Ok(worst)
    }

    /// True when every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Converts every entry through `f64` into another scalar type.
    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| U::from_f64(v.to_f64())).collect(),
        }
    }
}

impl<T: Scalar> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T: Scalar> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// A named trainable tensor with its gradient accumulator.
#[derive(Debug, Clone)]
pub struct Parameter<T> {
    /// Stable name, used for checkpoint tensors and diagnostics.
    pub name: String,
    /// Current value.
    pub value: Matrix<T>,
    /// Gradient of the current loss with respect to `value`; same shape.
    pub grad: Matrix<T>,
}

impl<T: Scalar> Parameter<T> {
    /// Wraps a value with a zeroed gradient of the same shape.
    pub fn new(name: impl Into<String>, value: Matrix<T>) -> Self {
        let grad = Matrix::zeros(value.rows(), value.cols());
        Parameter {
            name: name.into(),
            value,
            grad,
        }
    }

    /// Resets the gradient to zero.
    pub fn zero_grad(&mut self) {
        for g in self.grad.data_mut() {
            *g = T::zero();
        }
    }
}

/// Row-wise softmax over a restricted column window.
///
/// `window(i)` returns the inclusive 0-based column range `(lo, hi)` that
/// row `i` may attend to; entries outside the window come out as exactly
/// zero. Each window is reduced with a max-subtraction for stability, and
/// all loops run ascending so the result is bit-identical no matter how
/// the caller later slices the computation.
pub fn masked_softmax_rows<T: Scalar>(
    scores: &Matrix<T>,
    window: impl Fn(usize) -> (usize, usize),
) -> Result<Matrix<T>> {
    let mut out = Matrix::zeros(scores.rows(), scores.cols());
    for i in 0..scores.rows() {
        let (lo, hi) = window(i);
        if lo > hi || hi >= scores.cols() {
            return Err(ArstError::Invariant(format!(
                "softmax window ({lo}, {hi}) invalid for row {i} of width {}",
                scores.cols()
            )));
        }
        let src = scores.row(i);
        let mut max = src[lo];
        for &v in &src[lo + 1..=hi] {
            if v > max {
                max = v;
            }
        }
        let dst = out.row_mut(i);
        let mut sum = T::zero();
        for j in lo..=hi {
            let e = (src[j] - max).exp();
            dst[j] = e;
            sum += e;
        }
        if !(sum > T::zero()) || !sum.is_finite() {
            return Err(ArstError::Numeric(format!(
                "softmax row {i} produced a non-normalizable sum {sum}"
            )));
        }
        for v in &mut dst[lo..=hi] {
            *v /= sum;
        }
    }
    Ok(out)
}

/// Backward pass for [`masked_softmax_rows`].
///
/// Given the forward output `probs` and the upstream gradient `dprobs`,
/// returns the gradient with respect to the pre-softmax scores:
/// `dscore[j] = p[j] * (dp[j] - Σ_k p[k] * dp[k])` inside the window,
/// zero outside.
pub fn masked_softmax_backward<T: Scalar>(
    probs: &Matrix<T>,
    dprobs: &Matrix<T>,
    window: impl Fn(usize) -> (usize, usize),
) -> Result<Matrix<T>> {
    if probs.shape() != dprobs.shape() {
        return Err(ArstError::shape(
            "masked_softmax_backward",
            probs.shape(),
            dprobs.shape(),
        ));
    }
    let mut out = Matrix::zeros(probs.rows(), probs.cols());
    for i in 0..probs.rows() {
        let (lo, hi) = window(i);
        let p = probs.row(i);
        let dp = dprobs.row(i);
        let mut dot = T::zero();
        for j in lo..=hi {
            dot += p[j] * dp[j];
        }
        let dst = out.row_mut(i);
        for j in lo..=hi {
            dst[j] = p[j] * (dp[j] - dot);
        }
    }
    Ok(out)
}

/// Layer normalization of a single row vector.
///
/// Normalizes `x` to zero mean and unit variance (biased variance plus
/// `eps` under the square root), then applies the elementwise affine map
/// `gamma * xhat + beta`.
pub fn layer_norm<T: Scalar>(x: &[T], gamma: &[T], beta: &[T], eps: T) -> Result<Vec<T>> {
    let mut out = vec![T::zero(); x.len()];
    let mut xhat = vec![T::zero(); x.len()];
    layer_norm_row(x, gamma, beta, eps, &mut out, &mut xhat)?;
    Ok(out)
}

/// Row kernel shared by the public function and the model's batched layer:
/// writes the output into `out`, the normalized pre-affine values into
/// `xhat`, and returns `1 / sqrt(var + eps)` for the backward pass.
pub(crate) fn layer_norm_row<T: Scalar>(
    x: &[T],
    gamma: &[T],
    beta: &[T],
    eps: T,
    out: &mut [T],
    xhat: &mut [T],
) -> Result<T> {
    let d = x.len();
    if d == 0 || gamma.len() != d || beta.len() != d || out.len() != d || xhat.len() != d {
        return Err(ArstError::shape("layer_norm", (1, d), (1, gamma.len())));
    }
    let n = T::from_f64(d as f64);
    let mut mean = T::zero();
    for &v in x {
        mean += v;
    }
    mean /= n;
    let mut var = T::zero();
    for &v in x {
        let c = v - mean;
        var += c * c;
    }
    var /= n;
    let inv_std = T::one() / (var + eps).sqrt();
    for j in 0..d {
        let h = (x[j] - mean) * inv_std;
        xhat[j] = h;
        out[j] = gamma[j] * h + beta[j];
    }
    Ok(inv_std)
}

/// Backward pass for one layer-normalized row.
///
/// `xhat` and `inv_std` are the forward cache from [`layer_norm_row`];
/// `dy` is the upstream gradient. Writes the input gradient into `dx` and
/// accumulates the affine parameter gradients into `dgamma` / `dbeta`.
pub(crate) fn layer_norm_row_backward<T: Scalar>(
    xhat: &[T],
    inv_std: T,
    gamma: &[T],
    dy: &[T],
    dx: &mut [T],
    dgamma: &mut [T],
    dbeta: &mut [T],
) {
    let d = xhat.len();
    let n = T::from_f64(d as f64);
    // g = dy * gamma; dx = inv_std * (g - mean(g) - xhat * mean(g * xhat))
    let mut mean_g = T::zero();
    let mut mean_gx = T::zero();
    for j in 0..d {
        let g = dy[j] * gamma[j];
        mean_g += g;
        mean_gx += g * xhat[j];
    }
    mean_g /= n;
    mean_gx /= n;
    for j in 0..d {
        let g = dy[j] * gamma[j];
        dx[j] = inv_std * (g - mean_g - xhat[j] * mean_gx);
        dgamma[j] += dy[j] * xhat[j];
        dbeta[j] += dy[j];
    }
}
