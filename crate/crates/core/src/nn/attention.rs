//! Word attention pooling:
//!
//! ```text
//! u_t     = tanh(W_a h_t + b_a)
//! alpha_t = softmax_t(u_t . u_ctx)
//! context = sum_t alpha_t h_t
//! ```

use super::tensor::{glorot_init, Matrix, Vector};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq)]
pub struct AttentionParams {
    pub w_a: Matrix,
    pub b_a: Vector,
    pub u_ctx: Vector,
}

impl AttentionParams {
    pub fn zeros(hidden_size: usize) -> Self {
        Self {
            w_a: Matrix::zeros(hidden_size, hidden_size),
            b_a: Vector::zeros(hidden_size),
            u_ctx: Vector::zeros(hidden_size),
        }
    }

    pub fn glorot(hidden_size: usize, seed: u64) -> Result<Self> {
        let w_a = glorot_init(hidden_size, hidden_size, rng::derive(seed, 0))?;
        let u_ctx = glorot_init(hidden_size, 1, rng::derive(seed, 1))?;
        Ok(Self {
            w_a,
            b_a: Vector::zeros(hidden_size),
            u_ctx: Vector::from(u_ctx.data().to_vec()),
        })
    }

    pub fn hidden_size(&self) -> usize {
        self.b_a.len()
    }

    fn check(&self) -> Result<()> {
        let n = self.b_a.len();
        if self.w_a.shape() != (n, n) || self.u_ctx.len() != n {
            return Err(Error::InvalidShape(format!(
                "attention params: w_a {:?}, b_a {}, u_ctx {}",
                self.w_a.shape(),
                n,
                self.u_ctx.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AttentionCache {
    pub u: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
    pub context: Vec<f64>,
}

pub fn attention_forward(
    hs: &[Vector],
    p: &AttentionParams,
) -> Result<(Vector, Vec<f64>, AttentionCache)> {
    if hs.is_empty() {
        return Err(Error::EmptyInput("attention over empty sequence"));
    }
    p.check()?;
    let n = p.hidden_size();
    let mut u = Vec::with_capacity(hs.len());
    let mut scores = Vec::with_capacity(hs.len());
    for h in hs {
        if h.len() != n {
            return Err(Error::InvalidShape(format!(
                "hidden state of length {} for attention size {n}",
                h.len()
            )));
        }
        let mut ut = p.b_a.data().to_vec();
        p.w_a.accumulate_vec_mul(h.data(), 0, &mut ut);
        ut.iter_mut().for_each(|v| *v = v.tanh());
        scores.push(ut.iter().zip(p.u_ctx.data()).map(|(a, b)| a * b).sum::<f64>());
        u.push(ut);
    }

    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    let alphas: Vec<f64> = exps.iter().map(|e| e / total).collect();

    let mut context = vec![0.0; n];
    for (h, &a) in hs.iter().zip(&alphas) {
        context.iter_mut().zip(h.data()).for_each(|(c, v)| *c += a * v);
    }
    let cache = AttentionCache {
        u,
        alphas: alphas.clone(),
        context: context.clone(),
    };
    Ok((Vector::from(context), alphas, cache))
}

/// Returns the gradient w.r.t. each `h_t` and accumulates parameter
/// gradients into `grads`.
pub fn attention_backward(
    cache: &AttentionCache,
    hs: &[Vector],
    d_context: &[f64],
    p: &AttentionParams,
    grads: &mut AttentionParams,
) -> Result<Vec<Vec<f64>>> {
    if hs.len() != cache.alphas.len() {
        return Err(Error::InvalidState(
            "attention cache does not match hidden states".into(),
        ));
    }
    let d_alpha: Vec<f64> = hs
        .iter()
        .map(|h| h.data().iter().zip(d_context).map(|(a, b)| a * b).sum())
        .collect();
    let weighted: f64 = cache
        .alphas
        .iter()
        .zip(&d_alpha)
        .map(|(a, d)| a * d)
        .sum();

    let mut dhs = Vec::with_capacity(hs.len());
    for (t, h) in hs.iter().enumerate() {
        let alpha = cache.alphas[t];
        let d_score = alpha * (d_alpha[t] - weighted);
        let u = &cache.u[t];
        grads
            .u_ctx
            .data_mut()
            .iter_mut()
            .zip(u)
            .for_each(|(g, v)| *g += d_score * v);
        let d_pre: Vec<f64> = u
            .iter()
            .zip(p.u_ctx.data())
            .map(|(v, q)| d_score * q * (1.0 - v * v))
            .collect();
        grads.w_a.accumulate_outer(h.data(), 0, &d_pre);
        grads
            .b_a
            .data_mut()
            .iter_mut()
            .zip(&d_pre)
            .for_each(|(g, v)| *g += v);

        let mut dh: Vec<f64> = d_context.iter().map(|g| alpha * g).collect();
        p.w_a.accumulate_transposed_mul(&d_pre, 0, &mut dh);
        dhs.push(dh);
    }
    Ok(dhs)
}
