//! Adam optimizer with bias-corrected moment estimates.

use crate::error::{ArstError, Result};
use crate::numerics::{Parameterized, Scalar};

use super::TrainConfig;

/// First and second moment accumulators, one pair per parameter tensor.
///
/// Tensor order follows the model's canonical parameter enumeration, so a
/// state built for a model stays valid as long as the model's shape does
/// not change.
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    step: u64,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> AdamState<T> {
    /// Creates zeroed moment buffers matching the model's parameters.
    pub fn new<M: Parameterized<T>>(model: &M) -> Self {
        let sizes: Vec<usize> = model
            .parameters()
            .iter()
            .map(|p| p.value.data().len())
            .collect();
        AdamState {
            step: 0,
            m: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
            v: sizes.iter().map(|&n| vec![T::zero(); n]).collect(),
        }
    }

    /// Number of update steps applied so far.
    pub fn step_count(&self) -> u64 {
        self.step
    }
}

/// Applies one Adam update from the gradients currently stored in the model,
/// then clears those gradients.
pub fn adam_step<T: Scalar, M: Parameterized<T>>(
    model: &mut M,
    state: &mut AdamState<T>,
    cfg: &TrainConfig,
) -> Result<()> {
    let mut params = model.parameters_mut();
    if params.len() != state.m.len() {
        return Err(ArstError::Invariant(format!(
            "optimizer state holds {} tensors but model has {}",
            state.m.len(),
            params.len()
        )));
    }
    state.step += 1;
    let t = state.step;
    let lr = T::from_f64(cfg.learning_rate);
    let beta1 = T::from_f64(cfg.adam_beta1);
    let beta2 = T::from_f64(cfg.adam_beta2);
    let eps = T::from_f64(cfg.adam_eps);
    let one = T::one();
    let bias1 = one - beta1.powi(t as i32);
    let bias2 = one - beta2.powi(t as i32);

    for (idx, param) in params.iter_mut().enumerate() {
        let n = param.value.data().len();
        if state.m[idx].len() != n {
            return Err(ArstError::Invariant(format!(
                "optimizer tensor {idx} has {} entries but parameter {} has {n}",
                state.m[idx].len(),
                param.name
            )));
        }
        let m = &mut state.m[idx];
        let v = &mut state.v[idx];
        let grad = param.grad.data();
        for i in 0..n {
            let g = grad[i];
            m[i] = beta1 * m[i] + (one - beta1) * g;
            v[i] = beta2 * v[i] + (one - beta2) * g * g;
        }
        let value = param.value.data_mut();
        for i in 0..n {
            let m_hat = m[i] / bias1;
            let v_hat = v[i] / bias2;
            value[i] -= lr * m_hat / (v_hat.sqrt() + eps);
            if !value[i].is_finite() {
                return Err(ArstError::Numeric(format!(
                    "parameter {} became non-finite during optimizer step {t}",
                    param.name
                )));
            }
        }
        param.grad.data_mut().fill(T::zero());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{Matrix, Parameter};

    struct OneParam {
        p: Parameter<f64>,
    }

    impl OneParam {
        fn new(value: f64) -> Self {
            OneParam {
                p: Parameter::new("p", Matrix::from_vec(1, 1, vec![value]).unwrap()),
            }
        }
        fn set_grad(&mut self, g: f64) {
            self.p.grad[(0, 0)] = g;
        }
        fn value(&self) -> f64 {
            self.p.value[(0, 0)]
        }
    }

    impl Parameterized<f64> for OneParam {
        fn parameters(&self) -> Vec<&Parameter<f64>> {
            vec![&self.p]
        }
        fn parameters_mut(&mut self) -> Vec<&mut Parameter<f64>> {
            vec![&mut self.p]
        }
    }

    fn cfg(lr: f64) -> TrainConfig {
        TrainConfig {
            learning_rate: lr,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn first_step_moves_by_lr_over_one_plus_eps() {
        // With a unit gradient, the bias-corrected first step reduces to
        // -lr * 1 / (1 + eps) regardless of the betas.
        let mut model = OneParam::new(0.0);
        let mut state = AdamState::new(&model);
        let cfg = cfg(1e-3);
        model.set_grad(1.0);
        adam_step(&mut model, &mut state, &cfg).unwrap();
        let expect = -cfg.learning_rate / (1.0 + cfg.adam_eps);
        assert!((model.value() - expect).abs() < 1e-18);
        assert_eq!(state.step_count(), 1);
        // Gradient is consumed by the step.
        assert_eq!(model.p.grad[(0, 0)], 0.0);
    }

    #[test]
    fn zero_learning_rate_leaves_parameters_unchanged() {
        let mut model = OneParam::new(0.75);
        let mut state = AdamState::new(&model);
        let cfg = cfg(0.0);
        for _ in 0..3 {
            model.set_grad(2.5);
            adam_step(&mut model, &mut state, &cfg).unwrap();
        }
        assert_eq!(model.value(), 0.75);
        assert_eq!(state.step_count(), 3);
    }

    #[test]
    fn ten_steps_match_scalar_reference() {
        // Gradient of 0.5 * theta^2 is theta; run the closed-form recurrence
        // side by side with the optimizer.
        let cfg = cfg(0.05);
        let mut model = OneParam::new(1.0);
        let mut state = AdamState::new(&model);

        let mut theta = 1.0f64;
        let mut m = 0.0f64;
        let mut v = 0.0f64;
        for t in 1..=10u32 {
            let g = theta;
            m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
            v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g * g;
            let m_hat = m / (1.0 - cfg.adam_beta1.powi(t as i32));
            let v_hat = v / (1.0 - cfg.adam_beta2.powi(t as i32));
            theta -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_eps);

            let g_model = model.value();
            model.set_grad(g_model);
            adam_step(&mut model, &mut state, &cfg).unwrap();
            assert!(
                (model.value() - theta).abs() < 1e-15,
                "step {t}: {} vs {theta}",
                model.value()
            );
        }
        assert!(model.value() < 1.0, "descent should reduce theta");
    }

    #[test]
    fn mismatched_state_is_rejected() {
        let model_a = OneParam::new(0.0);
        let mut state = AdamState::new(&model_a);
        // Grow the parameter out from under the state.
        let mut model_b = OneParam::new(0.0);
        model_b.p.value = Matrix::zeros(2, 2);
        model_b.p.grad = Matrix::zeros(2, 2);
        let err = adam_step(&mut model_b, &mut state, &cfg(1e-3)).unwrap_err();
        assert!(matches!(err, ArstError::Invariant(_)));
    }
}
