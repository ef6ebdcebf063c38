use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outcome of recognizing one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub id: u64,
    pub observability: f64,
    pub group: u64,
    pub goal_set_size: usize,
    pub selected: usize,
    pub hidden: usize,
    pub correct: bool,
    /// Seconds.
    pub latency: f64,
    /// Normalized recognizability of the hidden goal.
    pub recognizability: Option<f64>,
    pub bucket: Option<u8>,
}

/// Percentage of correctly recognized instances.
pub fn accuracy(records: &[EvalRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no evaluation records"));
    }
    let correct = records.iter().filter(|r| r.correct).count();
    Ok(100.0 * correct as f64 / records.len() as f64)
}

/// Expected accuracy of uniform guessing: mean of `100 / |goal set|`.
pub fn chance_accuracy(records: &[EvalRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no evaluation records"));
    }
    Ok(records.iter().map(|r| 100.0 / r.goal_set_size as f64).sum::<f64>() / records.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MacroScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Macro precision, recall and F1 (percent) within one group. Classes are
/// goal positions; a class that is neither predicted nor true is skipped,
/// and an undefined ratio counts as 0.
fn macro_scores(records: &[&EvalRecord]) -> MacroScores {
    #[derive(Default)]
    struct Counts {
        tp: usize,
        predicted: usize,
        actual: usize,
    }
    let mut classes: BTreeMap<usize, Counts> = BTreeMap::new();
    for r in records {
        classes.entry(r.selected).or_default().predicted += 1;
        classes.entry(r.hidden).or_default().actual += 1;
        if r.selected == r.hidden {
            classes.entry(r.hidden).or_default().tp += 1;
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let (mut p, mut rc, mut f) = (0.0, 0.0, 0.0);
    for c in classes.values() {
        let precision = ratio(c.tp, c.predicted);
        let recall = ratio(c.tp, c.actual);
        p += precision;
        rc += recall;
        f += if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
    }
    let n = classes.len() as f64;
    MacroScores {
        precision: 100.0 * p / n,
        recall: 100.0 * rc / n,
        f1: 100.0 * f / n,
    }
}

/// Mean over goal-set groups of the within-group macro scores.
pub fn group_metrics(records: &[EvalRecord]) -> Result<MacroScores> {
    let mut groups: BTreeMap<u64, Vec<&EvalRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.group).or_default().push(r);
    }
    if groups.is_empty() {
        return Err(Error::EmptyInput("no evaluation records"));
    }
    let n = groups.len() as f64;
    let mut total = MacroScores { precision: 0.0, recall: 0.0, f1: 0.0 };
    for members in groups.values() {
        let s = macro_scores(members);
        total.precision += s.precision;
        total.recall += s.recall;
        total.f1 += s.f1;
    }
    Ok(MacroScores {
        precision: total.precision / n,
        recall: total.recall / n,
        f1: total.f1 / n,
    })
}

/// Metrics for one observability level. Percentages are 0 to 100, latency
/// in seconds with the population standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub configuration: String,
    pub observability: f64,
    pub count: usize,
    pub accuracy: f64,
    pub chance: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub latency_mean: f64,
    pub latency_std: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn row(&self, observability: f64) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.observability == observability)
    }

    pub fn extend(&mut self, other: MetricsTable) {
        self.rows.extend(other.rows);
    }
}

/// Splits records by observability level, in ascending order.
pub fn by_observability(records: &[EvalRecord]) -> Vec<(f64, Vec<EvalRecord>)> {
    let mut levels: BTreeMap<u64, Vec<EvalRecord>> = BTreeMap::new();
    for r in records {
        // non-negative floats order like their bit patterns
        levels.entry(r.observability.to_bits()).or_default().push(r.clone());
    }
    levels.into_iter().map(|(k, v)| (f64::from_bits(k), v)).collect()
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn metrics_table(records: &[EvalRecord], configuration: &str) -> Result<MetricsTable> {
    if records.is_empty() {
        return Err(Error::EmptyInput("no evaluation records"));
    }
    let mut rows = Vec::new();
    for (observability, level) in by_observability(records) {
        let scores = group_metrics(&level)?;
        let (latency_mean, latency_std) = mean_std(level.iter().map(|r| r.latency));
        rows.push(MetricsRow {
            configuration: configuration.to_string(),
            observability,
            count: level.len(),
            accuracy: accuracy(&level)?,
            chance: chance_accuracy(&level)?,
            precision: scores.precision,
            recall: scores.recall,
            f1: scores.f1,
            latency_mean,
            latency_std,
        });
    }
    Ok(MetricsTable { rows })
}
