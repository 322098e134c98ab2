//! Frame-averaged cross-entropy loss.

use crate::error::{ArstError, Result};
use crate::numerics::{Matrix, Scalar};

/// Cross-entropy between per-frame logits and 1-based phase labels.
///
/// Returns the loss averaged over frames together with its gradient with
/// respect to the logits: `(softmax(row) - onehot(label)) / frames`.
/// Each row is reduced through a max-shifted log-sum-exp, so large logit
/// magnitudes stay finite.
pub fn cross_entropy<T: Scalar>(logits: &Matrix<T>, labels: &[u32]) -> Result<(T, Matrix<T>)> {
    let frames = logits.rows();
    if labels.len() != frames {
        return Err(ArstError::LengthMismatch {
            pred: frames,
            gt: labels.len(),
        });
    }
    if frames == 0 {
        return Err(ArstError::Invariant("empty logits".into()));
    }
    let classes = logits.cols();
    let inv_n = T::one() / T::from_f64(frames as f64);
    let mut dlogits = Matrix::zeros(frames, classes);
    let mut total = T::zero();
    for i in 0..frames {
        let label = labels[i];
        if label == 0 || label as usize > classes {
            return Err(ArstError::PhaseId {
                id: label,
                classes: classes as u32,
            });
        }
        let target = label as usize - 1;
        let row = logits.row(i);
        let mut max = row[0];
        for &v in &row[1..] {
            if v > max {
                max = v;
            }
        }
        let mut sum = T::zero();
        for &v in row {
            sum += (v - max).exp();
        }
        let log_z = max + sum.ln();
        total += log_z - row[target];

        let drow = dlogits.row_mut(i);
        for (j, &v) in row.iter().enumerate() {
            let p = (v - max).exp() / sum;
            drow[j] = p * inv_n;
        }
        drow[target] -= inv_n;
    }
    let loss = total * inv_n;
    if !loss.is_finite() {
        return Err(ArstError::Numeric(format!(
            "cross-entropy produced non-finite loss {loss}"
        )));
    }
    Ok((loss, dlogits))
}
