//! Training pairs and goal-recognition instances synthesized from generated
//! Blocksworld plans, plus their line-delimited file format.

pub mod goals;
pub mod io;
pub mod observe;
pub mod recognizability;

use rand::Rng as _;

pub use goals::{generate_goal_set, generate_goal_set_with};
pub use io::{peek_domain, read_dataset, write_instances, write_pairs, Dataset};
pub use observe::{sample_observations, ObservationTrace};
pub use recognizability::{
    bucket_instances, normalized_recognizability, recognizability, RecognizabilityReport,
};

use crate::error::{Error, Result};
use crate::planning::{is_goal_satisfied, Blocksworld, FluentSet, State};
use crate::rng;

/// An observation trace with the goal of the plan it was sampled from.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingPair {
    pub trace: ObservationTrace,
    pub hidden_goal: FluentSet,
    pub seed: u64,
}

/// A goal-recognition problem: trace, candidate goals and the index of the
/// goal the agent actually pursued.
#[derive(Clone, Debug, PartialEq)]
pub struct GRInstance {
    pub id: u64,
    /// Instances generated around the same candidate set share a group.
    pub group: u64,
    pub trace: ObservationTrace,
    pub goal_set: Vec<FluentSet>,
    pub hidden_goal_index: usize,
    pub seed: u64,
}

impl GRInstance {
    pub fn hidden_goal(&self) -> &FluentSet {
        &self.goal_set[self.hidden_goal_index]
    }

    /// Checks the structural invariants of an evaluation instance.
    pub fn validate(&self) -> Result<()> {
        if self.trace.labels.is_empty() {
            return Err(Error::InvalidInstance("empty observation trace".into()));
        }
        if self.hidden_goal_index >= self.goal_set.len() {
            return Err(Error::InvalidInstance(format!(
                "hidden index {} outside goal set of size {}",
                self.hidden_goal_index,
                self.goal_set.len()
            )));
        }
        for (i, a) in self.goal_set.iter().enumerate() {
            if self.goal_set[i + 1..].contains(a) {
                return Err(Error::InvalidInstance("duplicate goals in goal set".into()));
            }
        }
        Ok(())
    }
}

/// Plans for `goal` from `init` and observes a fraction of the plan.
/// Goals already true in `init` are rejected: their plans are empty.
pub fn make_training_pair(
    domain: &Blocksworld,
    init: &State,
    goal: &FluentSet,
    observability: f64,
    seed: u64,
) -> Result<TrainingPair> {
    if goal.is_empty() {
        return Err(Error::InvalidInstance("empty hidden goal".into()));
    }
    if is_goal_satisfied(init, goal) {
        return Err(Error::InvalidInstance(
            "goal already holds in the initial state".into(),
        ));
    }
    let plan = domain.generate_plan(init, goal, rng::derive(seed, 0))?;
    let trace = sample_observations(&plan, observability, rng::derive(seed, 1))?;
    Ok(TrainingPair {
        trace,
        hidden_goal: goal.clone(),
        seed,
    })
}

/// Knobs for synthesizing training pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSetConfig {
    pub goal_size_min: usize,
    pub goal_size_max: usize,
    pub observability_min: f64,
    pub observability_max: f64,
}

impl Default for TrainingSetConfig {
    fn default() -> Self {
        Self {
            goal_size_min: 2,
            goal_size_max: 4,
            observability_min: 0.3,
            observability_max: 0.7,
        }
    }
}

fn check_sizes(domain: &Blocksworld, lo: usize, hi: usize) -> Result<()> {
    if lo == 0 || lo > hi || hi > domain.n_blocks() {
        return Err(Error::InvalidConfig(format!(
            "goal sizes {lo}..={hi} invalid for {} blocks",
            domain.n_blocks()
        )));
    }
    Ok(())
}

/// Samples a random initial state for which `goal` does not yet hold.
fn fresh_init(domain: &Blocksworld, goal: &FluentSet, seed: u64) -> Result<State> {
    for attempt in 0..1000 {
        let s = domain.random_state(rng::derive(seed, attempt));
        if !is_goal_satisfied(&s, goal) {
            return Ok(s);
        }
    }
    Err(Error::GenerationFailure(
        "every sampled initial state already satisfies the goal".into(),
    ))
}

/// `count` training pairs from random initial states and goals, with the
/// observed fraction drawn uniformly from the configured range.
pub fn generate_training_pairs(
    domain: &Blocksworld,
    count: usize,
    cfg: &TrainingSetConfig,
    seed: u64,
) -> Result<Vec<TrainingPair>> {
    check_sizes(domain, cfg.goal_size_min, cfg.goal_size_max)?;
    if !(cfg.observability_min > 0.0
        && cfg.observability_min <= cfg.observability_max
        && cfg.observability_max <= 1.0)
    {
        return Err(Error::InvalidConfig("observability range must lie in (0, 1]".into()));
    }
    let mut pairs = Vec::with_capacity(count);
    let mut attempt = 0u64;
    while pairs.len() < count {
        let s = rng::derive(seed, attempt);
        attempt += 1;
        let mut r = rng::seeded(s);
        let size = r.gen_range(cfg.goal_size_min..=cfg.goal_size_max);
        let observability = r.gen_range(cfg.observability_min..=cfg.observability_max);
        let goal = domain.random_goal(size, rng::derive(s, 1))?;
        let init = domain.random_state(rng::derive(s, 2));
        match make_training_pair(domain, &init, &goal, observability, rng::derive(s, 3)) {
            Ok(p) => pairs.push(p),
            Err(Error::InvalidInstance(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(pairs)
}

/// Knobs for synthesizing evaluation instances.
#[derive(Clone, Debug, PartialEq)]
pub struct TestSetConfig {
    pub groups: usize,
    /// Distinct hidden goals drawn from each candidate set.
    pub hidden_per_group: usize,
    pub goal_size_min: usize,
    pub goal_size_max: usize,
    pub goal_set_min: usize,
    pub goal_set_max: usize,
    /// Largest size difference between a distractor and the anchor goal.
    pub size_jitter: usize,
    pub overlap_min: f64,
    pub overlap_max: f64,
    pub observabilities: Vec<f64>,
}

impl Default for TestSetConfig {
    fn default() -> Self {
        Self {
            groups: 200,
            hidden_per_group: 3,
            goal_size_min: 2,
            goal_size_max: 4,
            goal_set_min: 5,
            goal_set_max: 10,
            size_jitter: 1,
            overlap_min: 0.0,
            overlap_max: 1.0,
            observabilities: vec![0.3, 0.5, 0.7],
        }
    }
}

/// Builds evaluation instances. Each group draws one candidate set around a
/// random anchor goal; `hidden_per_group` members of the set (the anchor
/// first) each get a plan from their own initial state, observed once at
/// every configured observability.
pub fn generate_test_instances(
    domain: &Blocksworld,
    cfg: &TestSetConfig,
    seed: u64,
) -> Result<Vec<GRInstance>> {
    check_sizes(domain, cfg.goal_size_min, cfg.goal_size_max)?;
    if cfg.goal_set_min < 2 || cfg.goal_set_min > cfg.goal_set_max {
        return Err(Error::InvalidConfig("goal set sizes must satisfy 2 <= min <= max".into()));
    }
    if cfg.hidden_per_group == 0 || cfg.hidden_per_group > cfg.goal_set_min {
        return Err(Error::InvalidConfig(
            "hidden goals per group must lie in 1..=goal_set_min".into(),
        ));
    }
    if !(0.0 <= cfg.overlap_min && cfg.overlap_min <= cfg.overlap_max && cfg.overlap_max <= 1.0) {
        return Err(Error::InvalidConfig("overlap range must lie in [0, 1]".into()));
    }
    if cfg.observabilities.is_empty() {
        return Err(Error::InvalidConfig("no observability levels".into()));
    }

    let mut instances = Vec::new();
    for group in 0..cfg.groups as u64 {
        let gs = rng::derive(seed, group);
        let mut r = rng::seeded(gs);
        let size = r.gen_range(cfg.goal_size_min..=cfg.goal_size_max);
        let m = r.gen_range(cfg.goal_set_min..=cfg.goal_set_max);
        let overlap = r.gen_range(cfg.overlap_min..=cfg.overlap_max);
        let anchor = domain.random_goal(size, rng::derive(gs, 1))?;
        let goal_set =
            generate_goal_set_with(&anchor, m, overlap, cfg.size_jitter, domain, rng::derive(gs, 2))?;
        let anchor_index = goal_set
            .iter()
            .position(|g| *g == anchor)
            .expect("anchor is in its goal set");

        let mut hidden = vec![anchor_index];
        let mut others: Vec<usize> = (0..m).filter(|&i| i != anchor_index).collect();
        rand::seq::SliceRandom::shuffle(others.as_mut_slice(), &mut r);
        hidden.extend(others.into_iter().take(cfg.hidden_per_group - 1));

        for (k, &hidden_index) in hidden.iter().enumerate() {
            let hs = rng::derive(gs, 100 + k as u64);
            let goal = &goal_set[hidden_index];
            let init = fresh_init(domain, goal, rng::derive(hs, 0))?;
            let plan = domain.generate_plan(&init, goal, rng::derive(hs, 1))?;
            for (j, &obs) in cfg.observabilities.iter().enumerate() {
                let os = rng::derive(hs, 10 + j as u64);
                let trace = sample_observations(&plan, obs, os)?;
                let inst = GRInstance {
                    id: instances.len() as u64,
                    group,
                    trace,
                    goal_set: goal_set.clone(),
                    hidden_goal_index: hidden_index,
                    seed: os,
                };
                inst.validate()?;
                instances.push(inst);
            }
        }
    }
    Ok(instances)
}
