use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{encode_trace, target_vector, ModelConfig};
use crate::dataset::TrainingPair;
use crate::error::{Error, Result};
use crate::nn::adam::{AdamConfig, AdamState};
use crate::nn::network::{backward_into, cached_loss, forward_with_cache};
use crate::nn::{DropoutMasks, ModelParams, PAD_INDEX};
use crate::planning::DomainVocabulary;
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_loss: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub final_train_loss: f64,
    pub final_validation_loss: f64,
    /// Epoch whose parameters were kept; 0 means the initialization.
    pub best_epoch: usize,
    pub seconds: f64,
    pub history: Vec<EpochLoss>,
}

/// Shuffled split of `0..n` into (train, validation) index lists, with
/// `round(fraction * n)` validation elements.
pub fn split_train_validation(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::seeded(seed));
    let n_val = ((fraction * n as f64).round() as usize).min(n);
    let train = idx.split_off(n_val);
    (train, idx)
}

struct Example {
    indices: Vec<usize>,
    target: Vec<f64>,
}

fn mean_loss(examples: &[Example], subset: &[usize], params: &ModelParams) -> Result<f64> {
    let mut total = 0.0;
    for &i in subset {
        let cache = forward_with_cache(&examples[i].indices, params, None)?;
        total += cached_loss(&cache, &examples[i].target)?;
    }
    let loss = total / subset.len() as f64;
    if !loss.is_finite() {
        return Err(Error::TrainingDivergence(format!("loss is {loss}")));
    }
    Ok(loss)
}

pub fn train(
    pairs: &[TrainingPair],
    config: &ModelConfig,
    vocab: &DomainVocabulary,
) -> Result<(ModelParams, TrainReport)> {
    train_with_progress(pairs, config, vocab, |_| {})
}

/// Mini-batch Adam training; keeps the parameters with the lowest
/// validation loss. Without a validation split the training loss decides.
pub fn train_with_progress(
    pairs: &[TrainingPair],
    config: &ModelConfig,
    vocab: &DomainVocabulary,
    mut on_epoch: impl FnMut(&EpochLoss),
) -> Result<(ModelParams, TrainReport)> {
    config.validate()?;
    if pairs.len() < config.batch_size {
        return Err(Error::InvalidConfig(format!(
            "{} training pairs is fewer than one batch of {}",
            pairs.len(),
            config.batch_size
        )));
    }
    let start = Instant::now();
    let examples = pairs
        .iter()
        .map(|p| {
            Ok(Example {
                indices: encode_trace(&p.trace, vocab)?,
                target: target_vector(&p.hidden_goal, vocab)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let seed = config.rng_seed;
    let (mut train_idx, val_idx) =
        split_train_validation(examples.len(), config.validation_fraction, rng::derive(seed, 1));
    if train_idx.is_empty() {
        return Err(Error::InvalidConfig("validation split leaves no training data".into()));
    }
    let selection_idx = if val_idx.is_empty() { train_idx.clone() } else { val_idx.clone() };

    let mut params = ModelParams::init(
        vocab.num_actions(),
        vocab.num_fluents(),
        config.embedding_dim,
        config.hidden_size,
        rng::derive(seed, 2),
    )?;
    let adam_cfg = AdamConfig {
        learning_rate: config.learning_rate,
        ..AdamConfig::default()
    };
    let mut adam = AdamState::for_params(adam_cfg, &params)?;
    let mut grads = params.zeros_like();
    let dropout = config.dropout > 0.0 || config.recurrent_dropout > 0.0;

    let mut best = params.clone();
    let mut best_loss = mean_loss(&examples, &selection_idx, &params)?;
    let mut best_epoch = 0;
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        let mut r = rng::stream(seed, epoch as u64);
        train_idx.shuffle(&mut r);
        let mut epoch_loss = 0.0;
        for chunk in train_idx.chunks(config.batch_size) {
            let width = chunk.iter().map(|&i| examples[i].indices.len()).max().unwrap_or(0);
            for g in grads.slices_mut() {
                g.fill(0.0);
            }
            let scale = 1.0 / chunk.len() as f64;
            let mut row = Vec::with_capacity(width);
            for &i in chunk {
                let ex = &examples[i];
                row.clear();
                row.extend_from_slice(&ex.indices);
                row.resize(width, PAD_INDEX);
                let masks = dropout.then(|| {
                    DropoutMasks::sample(
                        &mut r,
                        config.embedding_dim,
                        config.hidden_size,
                        config.dropout,
                        config.recurrent_dropout,
                    )
                });
                let cache = forward_with_cache(&row, &params, masks.as_ref())?;
                let loss = cached_loss(&cache, &ex.target)?;
                if !loss.is_finite() {
                    return Err(Error::TrainingDivergence(format!(
                        "loss is {loss} in epoch {epoch}"
                    )));
                }
                epoch_loss += loss;
                backward_into(&cache, &ex.target, &params, scale, &mut grads)?;
            }
            adam.step_params(&mut params, &grads)?;
            params.embedding.row_mut(PAD_INDEX).fill(0.0);
        }
        let train_loss = epoch_loss / train_idx.len() as f64;
        let selection_loss = mean_loss(&examples, &selection_idx, &params)?;
        let record = EpochLoss {
            epoch,
            train_loss,
            validation_loss: selection_loss,
        };
        on_epoch(&record);
        history.push(record);
        if selection_loss < best_loss {
            best_loss = selection_loss;
            best = params.clone();
            best_epoch = epoch;
        }
    }

    let final_train_loss = match history.last() {
        Some(h) => h.train_loss,
        None => mean_loss(&examples, &train_idx, &params)?,
    };
    let final_validation_loss = mean_loss(&examples, &selection_idx, &best)?;
    let report = TrainReport {
        epochs_run: config.epochs,
        final_train_loss,
        final_validation_loss,
        best_epoch,
        seconds: start.elapsed().as_secs_f64(),
        history,
    };
    Ok((best, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_training_pairs, TrainingSetConfig};
    use crate::nn::forward;
    use crate::planning::Blocksworld;

    fn toy(n: usize) -> (Blocksworld, Vec<TrainingPair>) {
        let d = Blocksworld::new(4).unwrap();
        let cfg = TrainingSetConfig {
            goal_size_min: 1,
            goal_size_max: 2,
            ..TrainingSetConfig::default()
        };
        let pairs = generate_training_pairs(&d, n, &cfg, 5).unwrap();
        (d, pairs)
    }

    fn small() -> ModelConfig {
        ModelConfig {
            embedding_dim: 6,
            hidden_size: 8,
            batch_size: 10,
            learning_rate: 1e-2,
            epochs: 12,
            ..ModelConfig::default()
        }
    }

    #[test]
    fn split_is_disjoint_and_sized() {
        for n in [1usize, 7, 50, 101] {
            for frac in [0.0, 0.2, 0.5] {
                let (t, v) = split_train_validation(n, frac, 3);
                assert!((v.len() as f64 - frac * n as f64).abs() <= 1.0);
                let mut all: Vec<usize> = t.iter().chain(&v).copied().collect();
                all.sort();
                assert_eq!(all, (0..n).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let (d, pairs) = toy(20);
        let cfg = ModelConfig { epochs: 0, ..small() };
        let (params, report) = train(&pairs, &cfg, d.vocabulary()).unwrap();
        let init = ModelParams::init(
            d.vocabulary().num_actions(),
            d.vocabulary().num_fluents(),
            6,
            8,
            rng::derive(cfg.rng_seed, 2),
        )
        .unwrap();
        assert_eq!(params, init);
        assert_eq!(report.best_epoch, 0);
        assert!(report.history.is_empty());
        assert!(report.final_train_loss.is_finite() && report.final_train_loss >= 0.0);
    }

    #[test]
    fn loss_descends_on_fifty_pairs() {
        let (d, pairs) = toy(50);
        let (_, report) = train(&pairs, &small(), d.vocabulary()).unwrap();
        let first = report.history[0].train_loss;
        let best = report.history.iter().map(|h| h.train_loss).fold(f64::INFINITY, f64::min);
        assert!(best < first, "first {first}, best {best}");
        assert!(report.best_epoch >= 1);
        assert!(report.history.iter().all(|h| h.train_loss >= 0.0 && h.validation_loss >= 0.0));
    }

    #[test]
    fn training_is_deterministic() {
        let (d, pairs) = toy(40);
        let cfg = ModelConfig {
            dropout: 0.2,
            recurrent_dropout: 0.1,
            epochs: 3,
            ..small()
        };
        let (a, ra) = train(&pairs, &cfg, d.vocabulary()).unwrap();
        let (b, rb) = train(&pairs, &cfg, d.vocabulary()).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra.history, rb.history);
        assert!(a.embedding.row(PAD_INDEX).iter().all(|&v| v == 0.0));
        let other = ModelConfig { rng_seed: 1, ..cfg };
        assert_ne!(train(&pairs, &other, d.vocabulary()).unwrap().0, a);
    }

    #[test]
    fn trained_model_ignores_padding() {
        let (d, pairs) = toy(30);
        let (params, _) = train(&pairs, &ModelConfig { epochs: 2, ..small() }, d.vocabulary()).unwrap();
        let ix = encode_trace(&pairs[0].trace, d.vocabulary()).unwrap();
        let mut padded = ix.clone();
        padded.extend([PAD_INDEX; 5]);
        assert_eq!(forward(&ix, &params).unwrap(), forward(&padded, &params).unwrap());
    }

    #[test]
    fn too_few_pairs() {
        let (d, pairs) = toy(5);
        assert!(matches!(
            train(&pairs, &small(), d.vocabulary()),
            Err(Error::InvalidConfig(_))
        ));
    }
}
