use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::metrics::{accuracy, by_observability, chance_accuracy, metrics_table, EvalRecord, MetricsTable};
use super::evaluate;
use crate::dataset::{GRInstance, TrainingPair};
use crate::error::{Error, Result};
use crate::model::{train, ModelConfig};
use crate::nn::ModelParams;
use crate::planning::DomainVocabulary;
use crate::recognizer::ScoreMode;
use crate::rng;

/// Accuracy of one difficulty class at one observability level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub observability: f64,
    pub bucket: u8,
    pub count: usize,
    pub accuracy: f64,
    pub chance: f64,
}

/// Per-class accuracy for every observability level. Classes without
/// instances are absent.
pub fn bucket_study(records: &[EvalRecord]) -> Result<Vec<BucketRow>> {
    let mut rows = Vec::new();
    for (observability, level) in by_observability(records) {
        for bucket in 1..=9u8 {
            let members: Vec<EvalRecord> =
                level.iter().filter(|r| r.bucket == Some(bucket)).cloned().collect();
            if members.is_empty() {
                continue;
            }
            rows.push(BucketRow {
                observability,
                bucket,
                count: members.len(),
                accuracy: accuracy(&members)?,
                chance: chance_accuracy(&members)?,
            });
        }
    }
    Ok(rows)
}

pub fn run_bucket_study(
    instances: &[GRInstance],
    params: &ModelParams,
    vocab: &DomainVocabulary,
) -> Result<Vec<BucketRow>> {
    bucket_study(&evaluate(instances, params, vocab, ScoreMode::Sum)?)
}

/// Instance count and accuracy over the classes in `buckets` at one
/// observability level; `None` when the pool is empty.
pub fn pooled_accuracy(
    records: &[EvalRecord],
    observability: f64,
    buckets: RangeInclusive<u8>,
) -> Option<(usize, f64)> {
    let pool: Vec<EvalRecord> = records
        .iter()
        .filter(|r| r.observability == observability && r.bucket.is_some_and(|b| buckets.contains(&b)))
        .cloned()
        .collect();
    accuracy(&pool).ok().map(|a| (pool.len(), a))
}

/// Indices of the first `round(fraction * n)` elements of one fixed
/// permutation, in ascending order. Smaller fractions give subsets of larger
/// ones, and fraction 1 gives `0..n`.
pub fn nested_subset(n: usize, fraction: f64, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng::seeded(seed));
    let k = ((fraction * n as f64).round() as usize).min(n);
    let mut out = perm[..k].to_vec();
    out.sort_unstable();
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeRow {
    pub fraction: f64,
    pub train_pairs: usize,
    pub accuracy: f64,
    pub table: MetricsTable,
}

/// Trains one model per fraction of `pairs` with the same config and seed,
/// and evaluates each on `test`.
pub fn run_size_study(
    pairs: &[TrainingPair],
    fractions: &[f64],
    test: &[GRInstance],
    config: &ModelConfig,
    vocab: &DomainVocabulary,
    mut on_model: impl FnMut(&SizeRow),
) -> Result<Vec<SizeRow>> {
    if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(Error::InvalidConfig(format!("fraction {f} outside (0, 1]")));
    }
    let mut rows = Vec::with_capacity(fractions.len());
    for &fraction in fractions {
        let subset: Vec<TrainingPair> = nested_subset(pairs.len(), fraction, rng::derive(config.rng_seed, 77))
            .into_iter()
            .map(|i| pairs[i].clone())
            .collect();
        if subset.len() < config.batch_size {
            return Err(Error::InvalidConfig(format!(
                "fraction {fraction} leaves {} pairs, fewer than one batch of {}",
                subset.len(),
                config.batch_size
            )));
        }
        let (params, _) = train(&subset, config, vocab)?;
        let records = evaluate(test, &params, vocab, ScoreMode::Sum)?;
        let row = SizeRow {
            fraction,
            train_pairs: subset.len(),
            accuracy: accuracy(&records)?,
            table: metrics_table(&records, &format!("fraction={fraction}"))?,
        };
        on_model(&row);
        rows.push(row);
    }
    Ok(rows)
}
