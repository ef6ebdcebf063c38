//! The instance component: scores each candidate goal from the network's
//! per-fluent predictions and picks the best one.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::GRInstance;
use crate::error::{Error, Result};
use crate::model::encode_trace;
use crate::nn::{forward, ModelParams, PredictionVector};
use crate::planning::{DomainVocabulary, FluentSet};

/// How fluent predictions are combined into a goal score.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    /// Sum of the goal's fluent predictions.
    #[default]
    Sum,
    /// Sum divided by goal size; 0 for the empty goal.
    Mean,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecognitionResult {
    pub selected_index: usize,
    pub scores: Vec<f64>,
    pub prediction: PredictionVector,
    /// Wall-clock seconds for encode, forward and select.
    pub latency: f64,
}

pub fn score_goal(goal: &FluentSet, preds: &PredictionVector, vocab: &DomainVocabulary) -> Result<f64> {
    score_goal_with(goal, preds, vocab, ScoreMode::Sum)
}

pub fn score_goal_with(
    goal: &FluentSet,
    preds: &PredictionVector,
    vocab: &DomainVocabulary,
    mode: ScoreMode,
) -> Result<f64> {
    if preds.len() != vocab.num_fluents() {
        return Err(Error::InvalidShape(format!(
            "{} predictions for {} fluents",
            preds.len(),
            vocab.num_fluents()
        )));
    }
    let mut sum = 0.0;
    for f in goal {
        sum += preds[vocab.fluent_slot(f)?];
    }
    Ok(match mode {
        ScoreMode::Sum => sum,
        ScoreMode::Mean if goal.is_empty() => 0.0,
        ScoreMode::Mean => sum / goal.len() as f64,
    })
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &s) in scores.iter().enumerate() {
        if best.is_none_or(|b| s > scores[b]) {
            best = Some(i);
        }
    }
    best
}

pub fn select_goal(
    goal_set: &[FluentSet],
    preds: &PredictionVector,
    vocab: &DomainVocabulary,
) -> Result<RecognitionResult> {
    select_goal_with(goal_set, preds, vocab, ScoreMode::Sum)
}

pub fn select_goal_with(
    goal_set: &[FluentSet],
    preds: &PredictionVector,
    vocab: &DomainVocabulary,
    mode: ScoreMode,
) -> Result<RecognitionResult> {
    if goal_set.is_empty() {
        return Err(Error::EmptyInput("empty goal set"));
    }
    let scores = goal_set
        .iter()
        .map(|g| score_goal_with(g, preds, vocab, mode))
        .collect::<Result<Vec<_>>>()?;
    Ok(RecognitionResult {
        selected_index: argmax(&scores).expect("non-empty"),
        scores,
        prediction: preds.clone(),
        latency: 0.0,
    })
}

pub fn recognize(
    instance: &GRInstance,
    params: &ModelParams,
    vocab: &DomainVocabulary,
) -> Result<RecognitionResult> {
    recognize_with(instance, params, vocab, ScoreMode::Sum)
}

pub fn recognize_with(
    instance: &GRInstance,
    params: &ModelParams,
    vocab: &DomainVocabulary,
    mode: ScoreMode,
) -> Result<RecognitionResult> {
    let start = Instant::now();
    let indices = encode_trace(&instance.trace, vocab)?;
    let preds = forward(&indices, params)?;
    let mut result = select_goal_with(&instance.goal_set, &preds, vocab, mode)?;
    result.latency = start.elapsed().as_secs_f64();
    Ok(result)
}
