//! The domain component: encoding traces and goals for the network,
//! training it, and persisting trained parameters.

pub mod checkpoint;
pub mod config;
pub mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, CHECKPOINT_VERSION};
pub use config::ModelConfig;
pub use train::{split_train_validation, train, EpochLoss, TrainReport};

use crate::dataset::ObservationTrace;
use crate::error::{Error, Result};
use crate::planning::{DomainVocabulary, FluentSet};

/// 1-based action indices of a trace, in trace order.
pub fn encode_labels<S: AsRef<str>>(labels: &[S], vocab: &DomainVocabulary) -> Result<Vec<usize>> {
    if labels.is_empty() {
        return Err(Error::EmptyInput("empty observation trace"));
    }
    labels
        .iter()
        .map(|l| {
            vocab
                .action_index(l.as_ref())
                .ok_or_else(|| Error::OutOfVocabulary(format!("action {:?}", l.as_ref())))
        })
        .collect()
}

pub fn encode_trace(trace: &ObservationTrace, vocab: &DomainVocabulary) -> Result<Vec<usize>> {
    encode_labels(&trace.labels, vocab)
}

/// Inverse of [`encode_labels`].
pub fn decode_indices(indices: &[usize], vocab: &DomainVocabulary) -> Result<Vec<String>> {
    indices
        .iter()
        .map(|&i| {
            vocab
                .action(i)
                .map(|a| a.label.clone())
                .ok_or_else(|| Error::OutOfVocabulary(format!("action index {i}")))
        })
        .collect()
}

/// Multi-hot target over the fluent vocabulary.
pub fn target_vector(goal: &FluentSet, vocab: &DomainVocabulary) -> Result<Vec<f64>> {
    let mut t = vec![0.0; vocab.num_fluents()];
    for f in goal {
        t[vocab.fluent_slot(f)?] = 1.0;
    }
    Ok(t)
}
