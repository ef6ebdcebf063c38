use std::sync::OnceLock;

use grnet::dataset::observe::sample_labels;
use grnet::dataset::recognizability::{bucket_of, recognizability};
use grnet::dataset::{
    generate_goal_set, generate_test_instances, generate_training_pairs, read_dataset, write_instances,
    write_pairs, TestSetConfig, TrainingSetConfig,
};
use grnet::eval::{accuracy, group_metrics, metrics_table, EvalRecord};
use grnet::nn::{forward, ModelParams, PredictionVector, PAD_INDEX};
use grnet::planning::{Blocksworld, FluentSet};
use grnet::recognizer::{score_goal, select_goal};
use proptest::prelude::*;
use proptest::sample::subsequence;

fn domain() -> &'static Blocksworld {
    static D: OnceLock<Blocksworld> = OnceLock::new();
    D.get_or_init(|| Blocksworld::new(6).unwrap())
}

fn preds_strategy() -> impl Strategy<Value = PredictionVector> {
    let n = domain().vocabulary().num_fluents();
    prop::collection::vec(0.0f64..1.0, n).prop_map(PredictionVector)
}

fn goal_strategy() -> impl Strategy<Value = FluentSet> {
    let fluents = domain().vocabulary().fluents().to_vec();
    let n = fluents.len();
    subsequence(fluents, 0..=n.min(8)).prop_map(|v| v.into_iter().collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn score_is_additive_over_disjoint_goals(a in goal_strategy(), b in goal_strategy(), p in preds_strategy()) {
        let v = domain().vocabulary();
        let b: FluentSet = b.difference(&a).cloned().collect();
        let union: FluentSet = a.union(&b).cloned().collect();
        let lhs = score_goal(&union, &p, v).unwrap();
        let rhs = score_goal(&a, &p, v).unwrap() + score_goal(&b, &p, v).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn selection_survives_positive_scaling(
        goals in prop::collection::vec(goal_strategy(), 1..8),
        p in preds_strategy(),
        k in 0.01f64..100.0,
    ) {
        let v = domain().vocabulary();
        let base = select_goal(&goals, &p, v).unwrap();
        let scaled = PredictionVector(p.0.iter().map(|x| x * k).collect());
        let after = select_goal(&goals, &scaled, v).unwrap();
        // exact ties may be reordered by rounding; otherwise the winner is kept
        let best = base.scores[base.selected_index];
        let runner_up = base.scores.iter().enumerate()
            .filter(|(i, _)| *i != base.selected_index)
            .map(|(_, s)| *s)
            .fold(f64::NEG_INFINITY, f64::max);
        if best - runner_up > 1e-9 {
            prop_assert_eq!(after.selected_index, base.selected_index);
        }
    }

    #[test]
    fn raising_a_prediction_never_lowers_a_score(g in goal_strategy(), p in preds_strategy(), slot in 0usize..1000, bump in 0.0f64..1.0) {
        let v = domain().vocabulary();
        let slot = slot % p.len();
        let mut q = p.clone();
        q.0[slot] += bump;
        prop_assert!(score_goal(&g, &q, v).unwrap() >= score_goal(&g, &p, v).unwrap());
    }

    #[test]
    fn observations_are_ordered_and_sized(len in 1usize..40, obs in 0.05f64..=1.0, seed in any::<u64>()) {
        let plan: Vec<String> = (0..len).map(|i| format!("(a{i})")).collect();
        let refs: Vec<&str> = plan.iter().map(String::as_str).collect();
        let t = sample_labels(&refs, obs, seed).unwrap();
        let want = ((obs * len as f64).round() as usize).clamp(1, len);
        prop_assert_eq!(t.labels.len(), want);
        let pos: Vec<usize> = t.labels.iter().map(|l| plan.iter().position(|p| p == l).unwrap()).collect();
        prop_assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn goal_sets_respect_recognizability_bounds(seed in any::<u64>(), size in 1usize..=4, m in 2usize..=10, overlap in 0.0f64..=1.0) {
        let d = domain();
        let hidden = d.random_goal(size, seed).unwrap();
        let set = generate_goal_set(&hidden, m, overlap, d, seed).unwrap();
        prop_assert_eq!(set.iter().filter(|g| **g == hidden).count(), 1);
        let r = recognizability(&hidden, &set).unwrap();
        let h = hidden.len() as f64;
        prop_assert!(r >= h / m as f64 - 1e-12 && r <= h + 1e-12);
    }

    #[test]
    fn buckets_cover_one_to_nine(z in 0.0f64..=1.0) {
        let b = bucket_of(z);
        prop_assert!((1..=9).contains(&b));
        if (0.1..0.9).contains(&z) {
            prop_assert!(0.1 * b as f64 <= z + 1e-9 && z < 0.1 * (b + 1) as f64);
        }
    }

    #[test]
    fn padding_never_changes_outputs(seed in any::<u64>(), trace in prop::collection::vec(1usize..=10, 1..10), pads in 1usize..=8) {
        let params = ModelParams::init(10, 6, 4, 5, seed).unwrap();
        let mut padded = trace.clone();
        padded.extend(std::iter::repeat_n(PAD_INDEX, pads));
        prop_assert_eq!(forward(&trace, &params).unwrap(), forward(&padded, &params).unwrap());
    }
}

fn records_strategy() -> impl Strategy<Value = Vec<EvalRecord>> {
    let rec = (0u64..4, 0usize..5, 0usize..5, prop::sample::select(vec![0.3, 0.5, 0.7]), 0.0f64..0.01)
        .prop_map(|(group, selected, hidden, observability, latency)| EvalRecord {
            id: 0,
            observability,
            group,
            goal_set_size: 5,
            selected,
            hidden,
            correct: selected == hidden,
            latency,
            recognizability: None,
            bucket: None,
        });
    prop::collection::vec(rec, 1..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn accuracy_is_mean_correctness(records in records_strategy()) {
        let hits = records.iter().filter(|r| r.correct).count();
        prop_assert_eq!(accuracy(&records).unwrap(), 100.0 * hits as f64 / records.len() as f64);
    }

    #[test]
    fn metrics_ignore_record_order(records in records_strategy(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = records.clone();
        shuffled.shuffle(&mut grnet::rng::seeded(seed));
        let a = group_metrics(&records).unwrap();
        let b = group_metrics(&shuffled).unwrap();
        prop_assert!((a.precision - b.precision).abs() < 1e-9);
        prop_assert!((a.recall - b.recall).abs() < 1e-9);
        prop_assert!((a.f1 - b.f1).abs() < 1e-9);
        let ta = metrics_table(&records, "x").unwrap();
        let tb = metrics_table(&shuffled, "x").unwrap();
        for (x, y) in ta.rows.iter().zip(&tb.rows) {
            prop_assert_eq!((x.observability, x.count, x.accuracy), (y.observability, y.count, y.accuracy));
            prop_assert!((0.0..=100.0).contains(&x.precision) && (0.0..=100.0).contains(&x.f1));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn datasets_round_trip(seed in any::<u64>(), count in 1usize..40) {
        let d = domain();
        let v = d.vocabulary();
        let dir = tempfile::tempdir().unwrap();

        let pairs = generate_training_pairs(d, count, &TrainingSetConfig::default(), seed).unwrap();
        let path = dir.path().join("pairs.jsonl");
        write_pairs(&path, &pairs, v).unwrap();
        prop_assert_eq!(read_dataset(&path, v).unwrap().pairs, pairs);

        let cfg = TestSetConfig { groups: 2, ..TestSetConfig::default() };
        let insts = generate_test_instances(d, &cfg, seed).unwrap();
        let path = dir.path().join("insts.jsonl");
        write_instances(&path, &insts, v).unwrap();
        prop_assert_eq!(read_dataset(&path, v).unwrap().instances, insts);
    }
}
