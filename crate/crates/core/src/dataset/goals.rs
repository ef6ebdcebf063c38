use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::planning::{Blocksworld, Fluent, FluentSet};
use crate::rng;

const ATTEMPTS_PER_GOAL: usize = 200;

/// Builds `m` distinct consistent goals that include `hidden` (at a
/// seed-chosen position).
///
/// Each distractor keeps on average `overlap * (|hidden| - 1)` fluents of
/// the hidden goal (stochastically rounded), so it always has at least one
/// fluent of its own, and is filled up with random compatible On/On-Table
/// fluents to a size within one of `|hidden|`. A distractor is never a
/// superset of the hidden goal.
pub fn generate_goal_set(
    hidden: &FluentSet,
    m: usize,
    overlap: f64,
    domain: &Blocksworld,
    seed: u64,
) -> Result<Vec<FluentSet>> {
    generate_goal_set_with(hidden, m, overlap, 1, domain, seed)
}

/// Like [`generate_goal_set`], with distractor sizes within `size_jitter`
/// of `|hidden|`.
pub fn generate_goal_set_with(
    hidden: &FluentSet,
    m: usize,
    overlap: f64,
    size_jitter: usize,
    domain: &Blocksworld,
    seed: u64,
) -> Result<Vec<FluentSet>> {
    if m < 2 {
        return Err(Error::InvalidConfig(format!("goal set size {m} < 2")));
    }
    if hidden.is_empty() {
        return Err(Error::InvalidConfig("hidden goal is empty".into()));
    }
    if !(0.0..=1.0).contains(&overlap) {
        return Err(Error::InvalidConfig(format!("overlap {overlap} outside [0, 1]")));
    }
    domain.check_goal(hidden)?;

    let mut r = rng::seeded(seed);
    let hidden_list: Vec<&Fluent> = hidden.iter().collect();
    let fresh_pool: Vec<Fluent> = domain
        .goal_fluents()
        .into_iter()
        .filter(|f| !hidden.contains(f))
        .collect();
    let h = hidden.len();
    let max_goal = domain.n_blocks();

    let mut goals = vec![hidden.clone()];
    let mut failures = 0;
    while goals.len() < m {
        if failures >= ATTEMPTS_PER_GOAL {
            return Err(Error::GenerationFailure(format!(
                "could not build {m} distinct goals around a goal of size {h}"
            )));
        }
        let jitter = size_jitter as i64;
        let size = (h as i64 + r.gen_range(-jitter..=jitter)).clamp(1, max_goal as i64) as usize;
        let expected = overlap * (h - 1) as f64;
        let mut shared = expected.floor() as usize;
        if r.gen::<f64>() < expected - expected.floor() {
            shared += 1;
        }
        let shared = shared.min(size - 1);
        let mut goal: FluentSet = hidden_list
            .choose_multiple(&mut r, shared)
            .map(|f| (*f).clone())
            .collect();
        let mut pool = fresh_pool.clone();
        pool.shuffle(&mut r);
        for f in pool {
            if goal.len() == size {
                break;
            }
            goal.insert(f.clone());
            if domain.check_goal(&goal).is_err() {
                goal.remove(&f);
            }
        }
        if goal.len() == size && !goals.contains(&goal) {
            goals.push(goal);
        } else {
            failures += 1;
        }
    }
    let pos = r.gen_range(0..m);
    goals.swap(0, pos);
    Ok(goals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::recognizability::normalized_recognizability;
    use crate::planning::blocksworld::{block_name, on};

    #[test]
    fn zero_overlap_pair_is_fully_recognizable() {
        let d = Blocksworld::new(7).unwrap();
        let hidden: FluentSet = [on(&block_name(0), &block_name(1)), on(&block_name(2), &block_name(3))]
            .into_iter()
            .collect();
        for seed in 0..20 {
            let set = generate_goal_set(&hidden, 2, 0.0, &d, seed).unwrap();
            assert_eq!(set.len(), 2);
            assert_eq!(normalized_recognizability(&hidden, &set).unwrap(), 1.0);
        }
    }

    #[test]
    fn goal_sets_are_distinct_and_consistent() {
        let d = Blocksworld::new(7).unwrap();
        for seed in 0..100 {
            let hidden = d.random_goal(2 + seed as usize % 3, seed).unwrap();
            let m = 5 + seed as usize % 6;
            let overlap = (seed % 11) as f64 / 10.0;
            let set = generate_goal_set(&hidden, m, overlap, &d, seed).unwrap();
            assert_eq!(set.len(), m);
            assert_eq!(set.iter().filter(|g| **g == hidden).count(), 1);
            for (i, a) in set.iter().enumerate() {
                d.check_goal(a).unwrap();
                assert!(a.len().abs_diff(hidden.len()) <= 1);
                if *a != hidden {
                    assert!(!a.is_superset(&hidden));
                }
                for b in &set[i + 1..] {
                    assert_ne!(a, b);
                }
            }
        }
    }

    #[test]
    fn overlap_steers_recognizability() {
        let d = Blocksworld::new(7).unwrap();
        let mean_rz = |overlap: f64| {
            (0..50)
                .map(|seed| {
                    let hidden = d.random_goal(3, seed).unwrap();
                    let set = generate_goal_set(&hidden, 8, overlap, &d, seed).unwrap();
                    normalized_recognizability(&hidden, &set).unwrap()
                })
                .sum::<f64>()
                / 50.0
        };
        assert!(mean_rz(0.0) > mean_rz(0.5));
        assert!(mean_rz(0.5) > mean_rz(1.0));
    }

    #[test]
    fn zero_jitter_keeps_sizes_equal() {
        let d = Blocksworld::new(7).unwrap();
        for seed in 0..30 {
            let hidden = d.random_goal(3, seed).unwrap();
            let set = generate_goal_set_with(&hidden, 6, 0.5, 0, &d, seed).unwrap();
            assert!(set.iter().all(|g| g.len() == 3));
        }
    }

    #[test]
    fn tiny_domain_fails_cleanly() {
        let d = Blocksworld::new(1).unwrap();
        let hidden = d.goal_fluents().into_iter().collect();
        assert!(matches!(
            generate_goal_set(&hidden, 3, 0.0, &d, 0),
            Err(Error::GenerationFailure(_))
        ));
    }
}
