use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

use super::model::{Gradients, RnnModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Global-norm clipping threshold applied before each update.
    pub clip_norm: Option<f64>,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8, clip_norm: Some(5.0) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState<T> {
    pub config: AdamConfig,
    pub m: Vec<T>,
    pub v: Vec<T>,
    pub t: u64,
}

impl<T: Scalar> AdamState<T> {
    pub fn new(param_count: usize, config: AdamConfig) -> Self {
        Self { config, m: vec![T::zero(); param_count], v: vec![T::zero(); param_count], t: 0 }
    }

    pub fn for_model(model: &RnnModel<T>, config: AdamConfig) -> Self {
        Self::new(model.params().len(), config)
    }

    /// Applies one bias-corrected Adam update to `params` in place.
    pub fn update(&mut self, params: &mut [T], grads: &[T]) {
        assert_eq!(params.len(), grads.len(), "gradient shape mismatch");
        assert_eq!(params.len(), self.m.len(), "optimizer state shape mismatch");
        let c = self.config;
        let mut scale = T::one();
        if let Some(max_norm) = c.clip_norm {
            let norm = grads.iter().map(|g| *g * *g).sum::<T>().sqrt();
            if norm > T::of(max_norm) {
                scale = T::of(max_norm) / norm;
            }
        }
        self.t += 1;
        let (b1, b2) = (T::of(c.beta1), T::of(c.beta2));
        let bias1 = T::one() - b1.powi(self.t as i32);
        let bias2 = T::one() - b2.powi(self.t as i32);
        let (lr, eps) = (T::of(c.lr), T::of(c.eps));
        for i in 0..params.len() {
            let g = grads[i] * scale;
            self.m[i] = b1 * self.m[i] + (T::one() - b1) * g;
            self.v[i] = b2 * self.v[i] + (T::one() - b2) * g * g;
            let m_hat = self.m[i] / bias1;
            let v_hat = self.v[i] / bias2;
            params[i] = params[i] - lr * m_hat / (v_hat.sqrt() + eps);
        }
    }
}

pub fn adam_step<T: Scalar>(model: &mut RnnModel<T>, grads: &Gradients<T>, state: &mut AdamState<T>) {
    state.update(model.params_mut(), &grads.theta);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_from_rest_changes_nothing() {
        let mut p = vec![0.5, -1.0, 2.0];
        let mut s = AdamState::<f64>::new(3, AdamConfig::default());
        s.update(&mut p, &[0.0; 3]);
        assert_eq!(p, vec![0.5, -1.0, 2.0]);
        assert_eq!(s.t, 1);
    }

    #[test]
    fn first_step_is_signed_learning_rate() {
        let cfg = AdamConfig { clip_norm: None, ..Default::default() };
        let start = [0.1, 0.2, -0.3, 0.0];
        let g = [0.5, -2.0, 1e-3, -0.7];
        let mut p = start.to_vec();
        let mut s = AdamState::<f64>::new(4, cfg);
        s.update(&mut p, &g);
        for i in 0..4 {
            let expect = start[i] - cfg.lr * g[i].signum();
            assert!((p[i] - expect).abs() < 1e-4 * cfg.lr, "{i}: {} vs {expect}", p[i]);
        }
    }

    #[test]
    fn opposite_steps_return_near_start() {
        // m1 = 0.1 g, v1 = 0.001 g^2 -> step lr; m2 = -0.01 g, v2 ~ 0.002 g^2 -> step ~ -0.05 lr
        let cfg = AdamConfig { clip_norm: None, ..Default::default() };
        let start = [1.0, -0.4];
        let g = [0.8, -3.0];
        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
        let mut p = start.to_vec();
        let mut s = AdamState::<f64>::new(2, cfg);
        s.update(&mut p, &g);
        s.update(&mut p, &neg);
        for i in 0..2 {
            assert!((p[i] - start[i]).abs() <= 2.0 * cfg.lr);
        }
    }

    #[test]
    fn clipping_bounds_the_effective_gradient() {
        let cfg = AdamConfig { clip_norm: Some(1.0), ..Default::default() };
        let mut s = AdamState::<f64>::new(2, cfg);
        let mut p = vec![0.0, 0.0];
        s.update(&mut p, &[30.0, 40.0]);
        // clipped to norm 1: (0.6, 0.8)
        assert!((s.m[0] - 0.06).abs() < 1e-12 && (s.m[1] - 0.08).abs() < 1e-12);
    }
}
