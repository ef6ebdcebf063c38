use super::tensor::{sigmoid, Matrix, Vector};
use crate::error::{Error, Result};

/// Clamp applied to probabilities before taking logarithms.
pub const BCE_EPSILON: f64 = 1e-7;

/// Per-fluent goal probabilities, one sigmoid activation per fluent in
/// vocabulary order.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionVector(pub Vec<f64>);

impl PredictionVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for PredictionVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `o_j = sigmoid(context . w_out[:, j] + b_out[j])`.
pub fn dense_sigmoid_forward(
    context: &Vector,
    w_out: &Matrix,
    b_out: &Vector,
) -> Result<PredictionVector> {
    if w_out.rows() != context.len() || w_out.cols() != b_out.len() {
        return Err(Error::InvalidShape(format!(
            "output layer {:?} with context {} and bias {}",
            w_out.shape(),
            context.len(),
            b_out.len()
        )));
    }
    let mut logits = b_out.data().to_vec();
    w_out.accumulate_vec_mul(context.data(), 0, &mut logits);
    Ok(PredictionVector(logits.into_iter().map(sigmoid).collect()))
}

/// Mean binary cross-entropy over components, probabilities clamped to
/// `[1e-7, 1 - 1e-7]`.
pub fn bce_loss(preds: &PredictionVector, targets: &[f64]) -> Result<f64> {
    if preds.len() != targets.len() {
        return Err(Error::InvalidShape(format!(
            "{} predictions for {} targets",
            preds.len(),
            targets.len()
        )));
    }
    if preds.is_empty() {
        return Err(Error::EmptyInput("bce over zero components"));
    }
    let total: f64 = preds
        .0
        .iter()
        .zip(targets)
        .map(|(&p, &t)| {
            let p = p.clamp(BCE_EPSILON, 1.0 - BCE_EPSILON);
            -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
        })
        .sum();
    Ok(total / preds.len() as f64)
}

/// Gradient of [`bce_loss`] w.r.t. the output logits, scaled by `scale`.
/// Components whose probability sits on or beyond the clamp get zero.
pub fn bce_logit_grad(preds: &PredictionVector, targets: &[f64], scale: f64) -> Vec<f64> {
    let inv = scale / preds.len() as f64;
    preds
        .0
        .iter()
        .zip(targets)
        .map(|(&p, &t)| {
            if p <= BCE_EPSILON || p >= 1.0 - BCE_EPSILON {
                0.0
            } else {
                (p - t) * inv
            }
        })
        .collect()
}
