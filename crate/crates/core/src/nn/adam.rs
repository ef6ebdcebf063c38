//! Adam with bias correction.

use super::network::ModelParams;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.99,
            epsilon: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let beta_ok = |b: f64| b > 0.0 && b < 1.0;
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !(beta_ok(self.beta1) && beta_ok(self.beta2) && positive(self.learning_rate) && positive(self.epsilon)) {
            return Err(Error::InvalidConfig(format!("bad adam settings {self:?}")));
        }
        Ok(())
    }
}

/// Optimizer state over a flat list of parameter tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub step_count: u64,
}

impl AdamState {
    /// Zero moments for tensors of the given lengths.
    pub fn new(config: AdamConfig, tensor_lens: &[usize]) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            first_moment: tensor_lens.iter().map(|&n| vec![0.0; n]).collect(),
            second_moment: tensor_lens.iter().map(|&n| vec![0.0; n]).collect(),
            step_count: 0,
        })
    }

    pub fn for_params(config: AdamConfig, params: &ModelParams) -> Result<Self> {
        let lens: Vec<usize> = params.slices().iter().map(|s| s.len()).collect();
        Self::new(config, &lens)
    }

    /// One Adam update over parallel lists of parameter and gradient tensors.
    /// Nothing is modified if any gradient component is non-finite.
    pub fn step(&mut self, params: &mut [&mut [f64]], grads: &[&[f64]]) -> Result<()> {
        if params.len() != grads.len() || params.len() != self.first_moment.len() {
            return Err(Error::InvalidShape(format!(
                "adam: {} params, {} grads, {} moment tensors",
                params.len(),
                grads.len(),
                self.first_moment.len()
            )));
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.first_moment) {
            if p.len() != g.len() || p.len() != m.len() {
                return Err(Error::InvalidShape("adam tensor length mismatch".into()));
            }
        }
        if let Some((t, i)) = grads.iter().enumerate().find_map(|(t, g)| {
            g.iter().position(|v| !v.is_finite()).map(|i| (t, i))
        }) {
            return Err(Error::TrainingDivergence(format!(
                "non-finite gradient in tensor {t} at component {i}"
            )));
        }

        self.step_count += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        let t = self.step_count as i32;
        let correction1 = 1.0 - beta1.powi(t);
        let correction2 = 1.0 - beta2.powi(t);
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(grads)
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = beta1 * m[i] + (1.0 - beta1) * gi;
                v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi;
                let m_hat = m[i] / correction1;
                let v_hat = v[i] / correction2;
                p[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
            }
        }
        Ok(())
    }

    /// Applies `grads` to a full network.
    pub fn step_params(&mut self, params: &mut ModelParams, grads: &ModelParams) -> Result<()> {
        let mut ps = params.slices_mut();
        self.step(&mut ps, &grads.slices())
    }
}
