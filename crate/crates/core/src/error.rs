use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("training diverged: {0}")]
    TrainingDivergence(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("action {action} is not applicable: missing {missing}")]
    InapplicableAction { action: String, missing: String },

    #[error("unsatisfiable goal: {0}")]
    UnsatisfiableGoal(String),

    #[error("generation failed: {0}")]
    GenerationFailure(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("degenerate normalization: {0}")]
    DegenerateNormalization(String),

    #[error("out of vocabulary: {0}")]
    OutOfVocabulary(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("incompatible: {0}")]
    Incompatible(String),

    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by mismatched data/model artifacts rather than
    /// bad arguments or runtime failures.
    pub fn is_incompatibility(&self) -> bool {
        matches!(
            self,
            Error::Incompatible(_)
                | Error::Parse { .. }
                | Error::Corrupt(_)
                | Error::OutOfVocabulary(_)
        )
    }
}
