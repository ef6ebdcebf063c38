//! Experiment driver: evaluation records, metrics, the difficulty-class and
//! training-size studies, and report files.

pub mod metrics;
pub mod report;
pub mod studies;

use std::path::{Path, PathBuf};

pub use metrics::{
    accuracy, chance_accuracy, group_metrics, metrics_table, EvalRecord, MacroScores, MetricsRow,
    MetricsTable,
};
pub use studies::{
    bucket_study, nested_subset, pooled_accuracy, run_bucket_study, run_size_study, BucketRow,
    SizeRow,
};

use crate::dataset::recognizability::report;
use crate::dataset::{read_dataset, GRInstance};
use crate::error::{Error, Result};
use crate::model::load_checkpoint;
use crate::nn::ModelParams;
use crate::planning::{domain_from_id, DomainVocabulary};
use crate::recognizer::{recognize_with, ScoreMode};

/// Recognizes every instance, in order.
pub fn evaluate(
    instances: &[GRInstance],
    params: &ModelParams,
    vocab: &DomainVocabulary,
    mode: ScoreMode,
) -> Result<Vec<EvalRecord>> {
    instances
        .iter()
        .map(|inst| {
            let result = recognize_with(inst, params, vocab, mode)?;
            let rz = report(inst).ok();
            Ok(EvalRecord {
                id: inst.id,
                observability: inst.trace.observability,
                group: inst.group,
                goal_set_size: inst.goal_set.len(),
                selected: result.selected_index,
                hidden: inst.hidden_goal_index,
                correct: result.selected_index == inst.hidden_goal_index,
                latency: result.latency,
                recognizability: rz.map(|r| r.normalized),
                bucket: rz.map(|r| r.bucket),
            })
        })
        .collect()
}

/// Where the CSV summary of a record report goes.
pub fn summary_path(report_path: &Path) -> PathBuf {
    report_path.with_extension("csv")
}

/// Loads a checkpoint and a test set, evaluates every instance and writes
/// the records to `report_path` and the summary next to it.
pub fn run_experiment(dataset: &Path, checkpoint: &Path, report_path: &Path) -> Result<MetricsTable> {
    let ckpt = load_checkpoint(checkpoint, None)?;
    let domain = domain_from_id(&ckpt.domain_id).map_err(|e| Error::Incompatible(e.to_string()))?;
    let vocab = domain.vocabulary();
    ckpt.ensure_vocabulary(vocab)?;
    let data = read_dataset(dataset, vocab)?;
    if data.instances.is_empty() {
        return Err(Error::EmptyInput("dataset contains no recognition instances"));
    }
    let records = evaluate(&data.instances, &ckpt.params, vocab, ScoreMode::Sum)?;
    let table = metrics_table(&records, "grnet")?;
    report::write_records(report_path, &records)?;
    std::fs::write(summary_path(report_path), report::summary_csv(&table))?;
    Ok(table)
}
