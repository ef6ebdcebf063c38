#![allow(dead_code)]

//! Finite-difference gradient oracle shared by the test targets.

use grnet::nn::lstm::DropoutMasks;
use grnet::nn::network::{backward, forward_with_cache, ModelParams};
use grnet::nn::bce_loss;
use grnet::rng;
use rand::Rng;

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;
/// Denominator floor: with a 1e-5 step, central differences of an O(1) loss
/// carry ~1e-11 of rounding noise, so components below this magnitude are
/// compared on an absolute scale.
pub const MAGNITUDE_FLOOR: f64 = 1e-6;

fn loss_at(params: &ModelParams, indices: &[usize], targets: &[f64], masks: Option<&DropoutMasks>) -> f64 {
    let cache = forward_with_cache(indices, params, masks).unwrap();
    bce_loss(&cache.preds, targets).unwrap()
}

/// Largest relative error between the analytic gradient and the central
/// difference over every parameter component.
pub fn max_relative_error(
    params: &ModelParams,
    indices: &[usize],
    targets: &[f64],
    masks: Option<&DropoutMasks>,
) -> (f64, String) {
    let cache = forward_with_cache(indices, params, masks).unwrap();
    let grads = backward(&cache, targets, params, 1.0).unwrap();
    let analytic: Vec<Vec<f64>> = grads.slices().iter().map(|s| s.to_vec()).collect();

    let mut worst = (0.0, String::new());
    let mut probe = params.clone();
    for (t, a) in analytic.iter().enumerate() {
        for (i, &ai) in a.iter().enumerate() {
            let original = probe.slices()[t][i];
            probe.slices_mut()[t][i] = original + STEP;
            let up = loss_at(&probe, indices, targets, masks);
            probe.slices_mut()[t][i] = original - STEP;
            let down = loss_at(&probe, indices, targets, masks);
            probe.slices_mut()[t][i] = original;
            let numeric = (up - down) / (2.0 * STEP);
            let denom = ai.abs().max(numeric.abs()).max(MAGNITUDE_FLOOR);
            let rel = (ai - numeric).abs() / denom;
            if rel > worst.0 {
                worst = (
                    rel,
                    format!("{} [{i}]: analytic {ai} numeric {numeric}", grnet::nn::network::TENSOR_NAMES[t]),
                );
            }
        }
    }
    worst
}

pub fn random_case(seed: u64) -> (ModelParams, Vec<usize>, Vec<f64>) {
    let mut r = rng::seeded(seed);
    let hidden = r.gen_range(1..=4);
    let emb = r.gen_range(1..=3);
    let fluents = r.gen_range(1..=5);
    let actions = r.gen_range(2..=6);
    let len = r.gen_range(1..=4);
    let mut params = ModelParams::init(actions, fluents, emb, hidden, seed).unwrap();
    // make biases and the embedding non-trivial so every path carries signal
    for s in params.slices_mut() {
        for v in s.iter_mut() {
            *v += r.gen_range(-0.3..0.3);
        }
    }
    params.embedding.row_mut(0).fill(0.0);
    let indices = (0..len).map(|_| r.gen_range(1..=actions)).collect();
    let targets = (0..fluents).map(|_| if r.gen_bool(0.4) { 1.0 } else { 0.0 }).collect();
    (params, indices, targets)
}

