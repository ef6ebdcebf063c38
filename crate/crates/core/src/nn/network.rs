//! The full domain network: embedding -> LSTM -> word attention -> sigmoid
//! head, with a hand-derived reverse pass for the BCE loss.
//!
//! Index 0 is padding. Padded positions are masked out entirely: they do not
//! advance the recurrent state and receive no attention weight, which makes a
//! padded trace produce exactly the same output as the unpadded one.

use super::attention::{attention_backward, attention_forward, AttentionCache, AttentionParams};
use super::dense::{bce_logit_grad, bce_loss, PredictionVector};
use super::lstm::{
    lstm_sequence_backward, lstm_sequence_forward_masked, DropoutMasks, LstmCache, LstmParams,
};
use super::tensor::{glorot_init, uniform_init, Matrix, Vector};
use crate::error::{Error, Result};
use crate::rng;

pub const PAD_INDEX: usize = 0;

/// Half-width of the uniform embedding initializer.
pub const EMBEDDING_INIT_LIMIT: f64 = 0.05;

/// Every trainable tensor of the domain network.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    /// `(|A| + 1) x |E|`; row 0 is the padding row and stays zero.
    pub embedding: Matrix,
    pub lstm: LstmParams,
    pub attention: AttentionParams,
    /// `|LSTM| x |F|`
    pub w_out: Matrix,
    pub b_out: Vector,
}

/// Shape of a named tensor: matrices are `[rows, cols]`, vectors `[len]`.
pub type Shape = Vec<usize>;

pub const TENSOR_NAMES: [&str; 14] = [
    "embedding",
    "lstm.w_f",
    "lstm.w_i",
    "lstm.w_o",
    "lstm.w_c",
    "lstm.b_f",
    "lstm.b_i",
    "lstm.b_o",
    "lstm.b_c",
    "attention.w_a",
    "attention.b_a",
    "attention.u_ctx",
    "output.w",
    "output.b",
];

impl ModelParams {
    /// Random initialization: uniform embedding, Glorot weights, zero biases.
    pub fn init(
        num_actions: usize,
        num_fluents: usize,
        embedding_dim: usize,
        hidden_size: usize,
        seed: u64,
    ) -> Result<Self> {
        if num_actions == 0 || num_fluents == 0 || embedding_dim == 0 || hidden_size == 0 {
            return Err(Error::InvalidShape(format!(
                "network dimensions must be positive: |A|={num_actions} |F|={num_fluents} \
                 |E|={embedding_dim} |LSTM|={hidden_size}"
            )));
        }
        let mut embedding = uniform_init(
            num_actions + 1,
            embedding_dim,
            EMBEDDING_INIT_LIMIT,
            rng::derive(seed, 10),
        );
        embedding.row_mut(PAD_INDEX).fill(0.0);
        Ok(Self {
            embedding,
            lstm: LstmParams::glorot(hidden_size, embedding_dim, rng::derive(seed, 11))?,
            attention: AttentionParams::glorot(hidden_size, rng::derive(seed, 12))?,
            w_out: glorot_init(hidden_size, num_fluents, rng::derive(seed, 13))?,
            b_out: Vector::zeros(num_fluents),
        })
    }

    /// All-zero tensors with the shapes of `self`.
    pub fn zeros_like(&self) -> Self {
        Self {
            embedding: Matrix::zeros(self.embedding.rows(), self.embedding.cols()),
            lstm: LstmParams::zeros(self.lstm.hidden_size(), self.lstm.input_size()),
            attention: AttentionParams::zeros(self.attention.hidden_size()),
            w_out: Matrix::zeros(self.w_out.rows(), self.w_out.cols()),
            b_out: Vector::zeros(self.b_out.len()),
        }
    }

    pub fn num_actions(&self) -> usize {
        self.embedding.rows() - 1
    }

    pub fn num_fluents(&self) -> usize {
        self.b_out.len()
    }

    pub fn embedding_dim(&self) -> usize {
        self.embedding.cols()
    }

    pub fn hidden_size(&self) -> usize {
        self.lstm.hidden_size()
    }

    /// Shapes in [`TENSOR_NAMES`] order.
    pub fn shapes(&self) -> Vec<Shape> {
        let m = |m: &Matrix| vec![m.rows(), m.cols()];
        let v = |v: &Vector| vec![v.len()];
        vec![
            m(&self.embedding),
            m(&self.lstm.w_f),
            m(&self.lstm.w_i),
            m(&self.lstm.w_o),
            m(&self.lstm.w_c),
            v(&self.lstm.b_f),
            v(&self.lstm.b_i),
            v(&self.lstm.b_o),
            v(&self.lstm.b_c),
            m(&self.attention.w_a),
            v(&self.attention.b_a),
            v(&self.attention.u_ctx),
            m(&self.w_out),
            v(&self.b_out),
        ]
    }

    /// Raw tensor storage in [`TENSOR_NAMES`] order.
    pub fn slices(&self) -> [&[f64]; 14] {
        [
            self.embedding.data(),
            self.lstm.w_f.data(),
            self.lstm.w_i.data(),
            self.lstm.w_o.data(),
            self.lstm.w_c.data(),
            self.lstm.b_f.data(),
            self.lstm.b_i.data(),
            self.lstm.b_o.data(),
            self.lstm.b_c.data(),
            self.attention.w_a.data(),
            self.attention.b_a.data(),
            self.attention.u_ctx.data(),
            self.w_out.data(),
            self.b_out.data(),
        ]
    }

    pub fn slices_mut(&mut self) -> [&mut [f64]; 14] {
        [
            self.embedding.data_mut(),
            self.lstm.w_f.data_mut(),
            self.lstm.w_i.data_mut(),
            self.lstm.w_o.data_mut(),
            self.lstm.w_c.data_mut(),
            self.lstm.b_f.data_mut(),
            self.lstm.b_i.data_mut(),
            self.lstm.b_o.data_mut(),
            self.lstm.b_c.data_mut(),
            self.attention.w_a.data_mut(),
            self.attention.b_a.data_mut(),
            self.attention.u_ctx.data_mut(),
            self.w_out.data_mut(),
            self.b_out.data_mut(),
        ]
    }

    /// Rebuilds parameters from tensors listed in [`TENSOR_NAMES`] order.
    pub fn from_tensors(tensors: Vec<(Shape, Vec<f64>)>) -> Result<Self> {
        if tensors.len() != TENSOR_NAMES.len() {
            return Err(Error::InvalidShape(format!(
                "expected {} tensors, got {}",
                TENSOR_NAMES.len(),
                tensors.len()
            )));
        }
        let mut m = Vec::new();
        let mut v = Vec::new();
        for ((shape, data), name) in tensors.into_iter().zip(TENSOR_NAMES) {
            match shape.as_slice() {
                [r, c] => m.push(Matrix::from_vec(*r, *c, data)?),
                [n] if *n == data.len() => v.push(Vector::from(data)),
                _ => {
                    return Err(Error::InvalidShape(format!(
                        "tensor {name} has bad shape {shape:?} for {} values",
                        data.len()
                    )))
                }
            }
        }
        if m.len() != 7 || v.len() != 7 {
            return Err(Error::InvalidShape("wrong mix of matrices and vectors".into()));
        }
        let mut m = m.into_iter();
        let mut v = v.into_iter();
        let mut mat = || m.next().expect("counted");
        let mut vec = || v.next().expect("counted");
        let embedding = mat();
        let lstm = LstmParams::from_parts(mat(), mat(), mat(), mat(), vec(), vec(), vec(), vec())?;
        let attention = AttentionParams {
            w_a: mat(),
            b_a: vec(),
            u_ctx: vec(),
        };
        let params = Self {
            embedding,
            lstm,
            attention,
            w_out: mat(),
            b_out: vec(),
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks cross-layer shape consistency.
    pub fn validate(&self) -> Result<()> {
        let n = self.lstm.hidden_size();
        let ok = self.embedding.rows() >= 2
            && self.embedding.cols() == self.lstm.input_size()
            && self.attention.w_a.shape() == (n, n)
            && self.attention.b_a.len() == n
            && self.attention.u_ctx.len() == n
            && self.w_out.rows() == n
            && self.w_out.cols() == self.b_out.len();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidShape(format!(
                "inconsistent network shapes: {:?}",
                self.shapes()
            )))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|v| v.is_finite()))
    }

    /// `self += other` element-wise.
    pub fn add_assign(&mut self, other: &ModelParams) {
        for (a, b) in self.slices_mut().into_iter().zip(other.slices()) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for s in self.slices_mut() {
            s.iter_mut().for_each(|x| *x *= factor);
        }
    }
}

/// Activations from one forward pass over a single (unpadded) trace.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardCache {
    /// Action indices with padding removed.
    pub indices: Vec<usize>,
    pub lstm: LstmCache,
    pub hs: Vec<Vector>,
    pub attention: AttentionCache,
    pub preds: PredictionVector,
}

impl ForwardCache {
    pub fn alphas(&self) -> &[f64] {
        &self.attention.alphas
    }

    pub fn context(&self) -> &[f64] {
        &self.attention.context
    }
}

fn real_indices(indices: &[usize], params: &ModelParams) -> Result<Vec<usize>> {
    let limit = params.embedding.rows();
    let mut out = Vec::with_capacity(indices.len());
    for &ix in indices {
        if ix >= limit {
            return Err(Error::OutOfVocabulary(format!(
                "action index {ix} outside 1..={}",
                limit - 1
            )));
        }
        if ix != PAD_INDEX {
            out.push(ix);
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("trace has no non-padding observations"));
    }
    Ok(out)
}

/// Forward pass that keeps every activation. `masks` enables dropout.
pub fn forward_with_cache(
    indices: &[usize],
    params: &ModelParams,
    masks: Option<&DropoutMasks>,
) -> Result<ForwardCache> {
    let indices = real_indices(indices, params)?;
    let xs: Vec<Vector> = indices
        .iter()
        .map(|&ix| Vector::from(params.embedding.row(ix).to_vec()))
        .collect();
    let (hs, lstm) = lstm_sequence_forward_masked(&xs, &params.lstm, masks)?;
    let (context, _, attention) = attention_forward(&hs, &params.attention)?;
    let preds = super::dense::dense_sigmoid_forward(&context, &params.w_out, &params.b_out)?;
    Ok(ForwardCache {
        indices,
        lstm,
        hs,
        attention,
        preds,
    })
}

/// Inference: per-fluent goal probabilities for a trace of action indices.
pub fn forward(indices: &[usize], params: &ModelParams) -> Result<PredictionVector> {
    forward_with_cache(indices, params, None).map(|c| c.preds)
}

/// Loss of a cached forward pass.
pub fn cached_loss(cache: &ForwardCache, targets: &[f64]) -> Result<f64> {
    bce_loss(&cache.preds, targets)
}

/// Gradients of `loss_scale * bce(forward(indices), targets)` w.r.t. every
/// parameter tensor.
pub fn backward(
    cache: &ForwardCache,
    targets: &[f64],
    params: &ModelParams,
    loss_scale: f64,
) -> Result<ModelParams> {
    let mut grads = params.zeros_like();
    backward_into(cache, targets, params, loss_scale, &mut grads)?;
    Ok(grads)
}

/// Like [`backward`], accumulating into existing gradient buffers.
pub fn backward_into(
    cache: &ForwardCache,
    targets: &[f64],
    params: &ModelParams,
    loss_scale: f64,
    grads: &mut ModelParams,
) -> Result<()> {
    if targets.len() != params.num_fluents()
        || cache.preds.len() != params.num_fluents()
        || cache.hs.len() != cache.indices.len()
        || cache.lstm.steps.len() != cache.indices.len()
        || cache.hs.first().map(|h| h.len()) != Some(params.hidden_size())
        || cache.indices.iter().any(|&ix| ix >= params.embedding.rows())
    {
        return Err(Error::InvalidState(
            "forward cache does not match parameters or targets".into(),
        ));
    }

    let d_logits = bce_logit_grad(&cache.preds, targets, loss_scale);
    let context = &cache.attention.context;
    grads.w_out.accumulate_outer(context, 0, &d_logits);
    grads
        .b_out
        .data_mut()
        .iter_mut()
        .zip(&d_logits)
        .for_each(|(g, d)| *g += d);
    let mut d_context = vec![0.0; context.len()];
    params.w_out.accumulate_transposed_mul(&d_logits, 0, &mut d_context);

    let dhs = attention_backward(
        &cache.attention,
        &cache.hs,
        &d_context,
        &params.attention,
        &mut grads.attention,
    )?;
    let dxs = lstm_sequence_backward(&cache.lstm, &dhs, &params.lstm, &mut grads.lstm)?;
    for (&ix, dx) in cache.indices.iter().zip(&dxs) {
        grads
            .embedding
            .row_mut(ix)
            .iter_mut()
            .zip(dx)
            .for_each(|(g, d)| *g += d);
    }
    grads.embedding.row_mut(PAD_INDEX).fill(0.0);
    Ok(())
}
