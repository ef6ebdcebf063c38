use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planning::GroundedAction;
use crate::rng;

/// Order-preserving selection of action labels from a plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationTrace {
    pub labels: Vec<String>,
    pub source_plan_len: usize,
    pub observability: f64,
}

/// Number of observed actions for a plan of `plan_len` actions:
/// `round(observability * plan_len)`, at least one.
pub fn observation_count(plan_len: usize, observability: f64) -> usize {
    ((observability * plan_len as f64).round() as usize).clamp(1, plan_len.max(1))
}

/// Uniformly random order-preserving selection of
/// `round(observability * len)` actions (at least one).
pub fn sample_observations(
    plan: &[GroundedAction],
    observability: f64,
    seed: u64,
) -> Result<ObservationTrace> {
    let labels: Vec<&str> = plan.iter().map(|a| a.label.as_str()).collect();
    sample_labels(&labels, observability, seed)
}

pub fn sample_labels(plan: &[&str], observability: f64, seed: u64) -> Result<ObservationTrace> {
    if plan.is_empty() {
        return Err(Error::EmptyInput("cannot observe an empty plan"));
    }
    if !(observability > 0.0 && observability <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "observability {observability} outside (0, 1]"
        )));
    }
    let k = observation_count(plan.len(), observability);
    let mut r = rng::seeded(seed);
    let mut picked = rand::seq::index::sample(&mut r, plan.len(), k).into_vec();
    picked.sort_unstable();
    Ok(ObservationTrace {
        labels: picked.into_iter().map(|i| plan[i].to_string()).collect(),
        source_plan_len: plan.len(),
        observability,
    })
}
