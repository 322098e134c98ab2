//! Finite-difference gradient verification.
//!
//! Analytic backward passes are checked against central finite differences
//! of the loss. The checker walks every entry of every parameter, so it is
//! meant for small configurations and 64-bit precision, where the
//! `O(h^2)` truncation error of the central difference is not swamped by
//! rounding noise.

use crate::error::Result;
use crate::numerics::{Parameter, Scalar};

/// Anything that exposes a flat, stably-ordered list of parameters.
///
/// The order returned by [`Parameterized::parameters`] is a contract: it
/// defines checkpoint tensor order and optimizer state alignment, and
/// `parameters_mut` must enumerate the same tensors in the same order.
pub trait Parameterized<T: Scalar> {
    /// All parameters in canonical order.
    fn parameters(&self) -> Vec<&Parameter<T>>;

    /// All parameters in canonical order, mutably.
    fn parameters_mut(&mut self) -> Vec<&mut Parameter<T>>;

    /// Total number of scalar entries across all parameters.
    fn parameter_count(&self) -> usize {
        self.parameters().iter().map(|p| p.value.len()).sum()
    }
}

/// Outcome of a gradient check.
#[derive(Debug, Clone)]
pub struct GradCheckReport<T> {
    /// Worst relative error over all parameter entries.
    pub max_rel_err: T,
    /// Name of the parameter containing the worst entry.
    pub worst_param: String,
    /// Flat index of the worst entry within that parameter.
    pub worst_index: usize,
    /// Number of scalar entries checked.
    pub entries: usize,
}

/// Compares analytic gradients against central finite differences.
///
/// `loss` evaluates the objective at the current parameters without side
/// effects. `loss_and_grad` evaluates the same objective and leaves the
/// analytic gradient in each parameter's `grad` field (overwriting, not
/// accumulating on top of stale values). For every entry the perturbed
/// losses `L(θ ± h)` yield the central estimate `(L⁺ - L⁻) / 2h`, and the
/// relative error is `|analytic - fd| / max(1, |analytic|, |fd|)`.
pub fn check_gradients<T, M>(
    model: &mut M,
    mut loss: impl FnMut(&M) -> Result<T>,
    mut loss_and_grad: impl FnMut(&mut M) -> Result<T>,
    h: T,
) -> Result<GradCheckReport<T>>
where
    T: Scalar,
    M: Parameterized<T>,
{
    loss_and_grad(model)?;
    let analytic: Vec<(String, Vec<T>)> = model
        .parameters()
        .iter()
        .map(|p| (p.name.clone(), p.grad.data().to_vec()))
        .collect();

    let mut report = GradCheckReport {
        max_rel_err: T::zero(),
        worst_param: String::new(),
        worst_index: 0,
        entries: 0,
    };
    let two = T::from_f64(2.0);

    for (p_idx, (name, grads)) in analytic.iter().enumerate() {
        for e_idx in 0..grads.len() {
            let original = {
                let mut ps = model.parameters_mut();
                let v = ps[p_idx].value.data()[e_idx];
                ps[p_idx].value.data_mut()[e_idx] = v + h;
                v
            };
            let up = loss(model)?;
            {
                let mut ps = model.parameters_mut();
                ps[p_idx].value.data_mut()[e_idx] = original - h;
            }
            let down = loss(model)?;
            {
                let mut ps = model.parameters_mut();
                ps[p_idx].value.data_mut()[e_idx] = original;
            }

            let fd = (up - down) / (two * h);
            let a = grads[e_idx];
            let scale = T::one().max(a.abs()).max(fd.abs());
            let rel = (a - fd).abs() / scale;
            report.entries += 1;
            if rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst_param = name.clone();
                report.worst_index = e_idx;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Matrix, SeededRng};

    /// Minimal single-tensor model used to exercise the checker.
    struct Toy {
        w: Parameter<f64>,
    }

    impl Parameterized<f64> for Toy {
        fn parameters(&self) -> Vec<&Parameter<f64>> {
            vec![&self.w]
        }

        fn parameters_mut(&mut self) -> Vec<&mut Parameter<f64>> {
            vec![&mut self.w]
        }
    }

    #[test]
    fn quadratic_loss_gradient_verifies() {
        // L(W) = 0.5 * ||W x||^2, dL/dW = (W x) x^T.
        let mut rng = SeededRng::new(5);
        let w_val =
            Matrix::from_vec(3, 4, (0..12).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap();
        let x: Vec<f64> = (0..4).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let mut toy = Toy {
            w: Parameter::new("w", w_val),
        };

        let wx = |w: &Matrix<f64>| -> Vec<f64> {
            (0..3)
                .map(|i| w.row(i).iter().zip(&x).map(|(&a, &b)| a * b).sum())
                .collect()
        };
        let loss = |t: &Toy| -> crate::Result<f64> {
            Ok(0.5 * wx(&t.w.value).iter().map(|v| v * v).sum::<f64>())
        };
        let report = check_gradients(
            &mut toy,
            loss,
            |t: &mut Toy| {
                let y = wx(&t.w.value);
                for i in 0..3 {
                    for j in 0..4 {
                        t.w.grad[(i, j)] = y[i] * x[j];
                    }
                }
                Ok(0.5 * y.iter().map(|v| v * v).sum::<f64>())
            },
            1e-6,
        )
        .unwrap();
        assert_eq!(report.entries, 12);
        assert!(report.max_rel_err < 1e-9, "rel err {}", report.max_rel_err);
    }

    #[test]
    fn logistic_loss_matches_closed_form() {
        // L(w) = -[y ln s + (1 - y) ln(1 - s)], s = sigmoid(w * x);
        // dL/dw = (s - y) * x.
        let x = 1.7;
        let y = 1.0;
        let sigmoid = |v: f64| 1.0 / (1.0 + (-v).exp());
        let mut toy = Toy {
            w: Parameter::new("w", Matrix::from_vec(1, 1, vec![0.3]).unwrap()),
        };
        let loss = |t: &Toy| -> crate::Result<f64> {
            let s = sigmoid(t.w.value[(0, 0)] * x);
            Ok(-(y * s.ln() + (1.0 - y) * (1.0 - s).ln()))
        };
        let report = check_gradients(
            &mut toy,
            loss,
            |t: &mut Toy| {
                let w = t.w.value[(0, 0)];
                let s = sigmoid(w * x);
                t.w.grad[(0, 0)] = (s - y) * x;
                Ok(-(y * s.ln() + (1.0 - y) * (1.0 - s).ln()))
            },
            1e-6,
        )
        .unwrap();
        assert!(report.max_rel_err < 1e-8, "rel err {}", report.max_rel_err);

        // The analytic value itself matches the closed form.
        let s = sigmoid(0.3 * x);
        assert!((toy.w.grad[(0, 0)] - (s - 1.0) * x).abs() < 1e-12);
    }

    #[test]
    fn deliberately_wrong_gradient_is_caught() {
        let mut toy = Toy {
            w: Parameter::new("w", Matrix::from_vec(1, 1, vec![0.8]).unwrap()),
        };
        let report = check_gradients(
            &mut toy,
            |t: &Toy| Ok(t.w.value[(0, 0)].powi(2)),
            |t: &mut Toy| {
                // Off by a factor of two on purpose.
                t.w.grad[(0, 0)] = t.w.value[(0, 0)];
                Ok(t.w.value[(0, 0)].powi(2))
            },
            1e-6,
        )
        .unwrap();
        assert!(report.max_rel_err > 0.1);
        assert_eq!(report.worst_param, "w");
    }
}
