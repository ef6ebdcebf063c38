//! Model-free goal recognition.
//!
//! A recurrent network reads a trace of observed action labels and scores
//! every fluent of the domain as a possible goal component; candidate goals
//! are then ranked by the summed scores of their fluents.

pub mod dataset;
pub mod error;
pub mod eval;
pub mod model;
pub mod nn;
pub mod planning;
pub mod recognizer;
pub mod rng;

pub use error::{Error, Result};
