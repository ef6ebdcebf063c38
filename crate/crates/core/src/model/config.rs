use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Network size and training schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub embedding_dim: usize,
    pub hidden_size: usize,
    pub dropout: f64,
    pub recurrent_dropout: f64,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub validation_fraction: f64,
    pub rng_seed: u64,
}

impl Default for ModelConfig {
    /// Small network that trains in minutes on one core.
    fn default() -> Self {
        Self {
            embedding_dim: 32,
            hidden_size: 64,
            dropout: 0.0,
            recurrent_dropout: 0.0,
            batch_size: 64,
            learning_rate: 5e-3,
            epochs: 30,
            validation_fraction: 0.2,
            rng_seed: 0,
        }
    }
}

impl ModelConfig {
    /// The published Blocksworld network size.
    pub fn published() -> Self {
        Self {
            embedding_dim: 119,
            hidden_size: 354,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.embedding_dim == 0 || self.hidden_size == 0 || self.batch_size == 0 {
            return bad("embedding_dim, hidden_size and batch_size must be at least 1".into());
        }
        for (name, v) in [("dropout", self.dropout), ("recurrent_dropout", self.recurrent_dropout)] {
            if !(0.0..=0.5).contains(&v) {
                return bad(format!("{name} {v} outside [0, 0.5]"));
            }
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad(format!(
                "validation_fraction {} outside [0, 1)",
                self.validation_fraction
            ));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate {} must be positive", self.learning_rate));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }
}
