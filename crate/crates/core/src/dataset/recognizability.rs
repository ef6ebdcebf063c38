//! Recognizability of a goal within a candidate set, its normalization to
//! `[0, 1]`, and the C1..C9 difficulty classes built on it.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::GRInstance;
use crate::error::{Error, Result};
use crate::planning::FluentSet;

/// `R(G) = Σ_{f ∈ G} 1 / |{G' ∈ goal_set : f ∈ G'}|`.
pub fn recognizability(goal: &FluentSet, goal_set: &[FluentSet]) -> Result<f64> {
    if !goal_set.contains(goal) {
        return Err(Error::InvalidInstance(
            "goal is not a member of the goal set".into(),
        ));
    }
    Ok(goal
        .iter()
        .map(|f| {
            let holders = goal_set.iter().filter(|g| g.contains(f)).count();
            1.0 / holders as f64
        })
        .sum())
}

/// Min-max normalization of `R(G)` over its attainable range
/// `[|G| / m, |G|]`, clamped to `[0, 1]`.
pub fn normalized_recognizability(goal: &FluentSet, goal_set: &[FluentSet]) -> Result<f64> {
    let m = goal_set.len();
    if m < 2 {
        return Err(Error::DegenerateNormalization(format!(
            "goal set of size {m}"
        )));
    }
    if goal.is_empty() {
        return Err(Error::DegenerateNormalization("empty goal".into()));
    }
    let r = recognizability(goal, goal_set)?;
    let size = goal.len() as f64;
    let floor = size / m as f64;
    Ok(((r - floor) / (size - floor)).clamp(0.0, 1.0))
}

/// Difficulty class `i` with `0.1 i <= R_Z < 0.1 (i + 1)`; values below 0.1
/// fall into C1 and `R_Z = 1` into C9.
pub fn bucket_of(normalized: f64) -> u8 {
    // tolerate rounding just below a class boundary
    let i = (normalized * 10.0 + 1e-9).floor() as i64;
    i.clamp(1, 9) as u8
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecognizabilityReport {
    pub raw: f64,
    pub normalized: f64,
    pub bucket: u8,
}

pub fn report(instance: &GRInstance) -> Result<RecognizabilityReport> {
    let hidden = instance.hidden_goal();
    let raw = recognizability(hidden, &instance.goal_set)?;
    let normalized = normalized_recognizability(hidden, &instance.goal_set)?;
    Ok(RecognizabilityReport {
        raw,
        normalized,
        bucket: bucket_of(normalized),
    })
}

/// Groups instances by difficulty class. Instances whose recognizability is
/// undefined (fewer than two candidate goals) are left out.
pub fn bucket_instances(instances: &[GRInstance]) -> BTreeMap<u8, Vec<&GRInstance>> {
    let mut out: BTreeMap<u8, Vec<&GRInstance>> = BTreeMap::new();
    for inst in instances {
        if let Ok(r) = report(inst) {
            out.entry(r.bucket).or_default().push(inst);
        }
    }
    out
}
