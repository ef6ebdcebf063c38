//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use grnet::dataset::recognizability::{normalized_recognizability, recognizability};
use grnet::dataset::{
    generate_test_instances, generate_training_pairs, GRInstance, TestSetConfig, TrainingPair,
    TrainingSetConfig,
};
use grnet::eval::{evaluate, metrics_table, pooled_accuracy, EvalRecord, MetricsTable};
use grnet::model::{encode_trace, load_checkpoint, save_checkpoint, train, Checkpoint, ModelConfig};
use grnet::nn::{forward, ModelParams, PredictionVector, PAD_INDEX};
use grnet::planning::{build_blocksworld_vocabulary, is_goal_satisfied, Blocksworld, Fluent, FluentSet};
use grnet::recognizer::{score_goal, select_goal, ScoreMode};
use grnet::rng;
use rand::Rng;

const TRAIN_PAIRS: usize = 5000;
const TEST_GROUPS: usize = 200;

struct Desk {
    domain: Blocksworld,
    pairs: Vec<TrainingPair>,
    test: Vec<GRInstance>,
    config: ModelConfig,
    params: ModelParams,
    records: Vec<EvalRecord>,
    table: MetricsTable,
}

fn desk() -> &'static Desk {
    static DESK: OnceLock<Desk> = OnceLock::new();
    DESK.get_or_init(|| {
        let domain = Blocksworld::new(7).unwrap();
        let pairs = generate_training_pairs(&domain, TRAIN_PAIRS, &TrainingSetConfig::default(), 1).unwrap();
        let test_cfg = TestSetConfig {
            groups: TEST_GROUPS,
            ..TestSetConfig::default()
        };
        let test = generate_test_instances(&domain, &test_cfg, 2).unwrap();
        let config = ModelConfig::default();
        let start = Instant::now();
        let (params, report) = train(&pairs, &config, domain.vocabulary()).unwrap();
        println!(
            "  desk model: {} pairs, {} test instances, trained in {:.1}s, best epoch {}/{}",
            pairs.len(),
            test.len(),
            start.elapsed().as_secs_f64(),
            report.best_epoch,
            report.epochs_run
        );
        let records = evaluate(&test, &params, domain.vocabulary(), ScoreMode::Sum).unwrap();
        let table = metrics_table(&records, "desk").unwrap();
        Desk {
            domain,
            pairs,
            test,
            config,
            params,
            records,
            table,
        }
    })
}

type Check = fn() -> (bool, String);

fn c1_recognizability() -> (bool, String) {
    let g = |names: &[&str]| -> FluentSet { names.iter().map(|n| Fluent::new(*n, &[])).collect() };
    let high = vec![g(&["a", "b", "c"]), g(&["a", "e", "f"]), g(&["g", "h", "i"])];
    let low = vec![g(&["a", "b", "c"]), g(&["a", "b", "x"]), g(&["a", "b", "y"])];
    let r1 = recognizability(&high[0], &high).unwrap();
    let z1 = normalized_recognizability(&high[0], &high).unwrap();
    let r2 = recognizability(&low[0], &low).unwrap();
    let z2 = normalized_recognizability(&low[0], &low).unwrap();
    let ok = (r1 - 2.5).abs() < 1e-12
        && (z1 - 0.75).abs() < 1e-12
        && (r2 - 5.0 / 3.0).abs() < 1e-12
        && (z2 - 1.0 / 3.0).abs() < 1e-12;
    (ok, format!("R={r1} R_Z={z1}; R={r2:.12} R_Z={z2:.12}"))
}

fn c2_vocabulary() -> (bool, String) {
    let v = build_blocksworld_vocabulary(22).unwrap();
    let ok = v.num_fluents() == 506 && v.num_actions() == 968;
    (ok, format!("{} fluents, {} actions", v.num_fluents(), v.num_actions()))
}

fn c3_scores() -> (bool, String) {
    let d = Blocksworld::new(22).unwrap();
    let v = d.vocabulary();
    let goal = |labels: &[&str]| -> FluentSet { labels.iter().map(|l| Fluent::parse(l).unwrap()).collect() };
    let g1 = goal(&["(On Block_F Block_C)", "(On Block_C Block_B)"]);
    let g2 = goal(&["(On Block_G Block_H)", "(On Block_H Block_F)"]);
    let mut p = vec![0.0; v.num_fluents()];
    for (label, value) in [
        ("(On Block_C Block_B)", 1.000),
        ("(On Block_F Block_C)", 0.017),
        ("(On Block_G Block_H)", 0.000),
        ("(On Block_H Block_F)", 0.003),
    ] {
        p[v.fluent_index(label).unwrap() - 1] = value;
    }
    let preds = PredictionVector(p);
    let s1 = score_goal(&g1, &preds, v).unwrap();
    let s2 = score_goal(&g2, &preds, v).unwrap();
    let sel = select_goal(&[g1, g2], &preds, v).unwrap().selected_index;
    let ok = (s1 - 1.017).abs() < 1e-12 && (s2 - 0.003).abs() < 1e-12 && sel == 0;
    (ok, format!("score(G1)={s1:.12} score(G2)={s2:.12} selected G{}", sel + 1))
}

fn c4_gradients() -> (bool, String) {
    let start = Instant::now();
    let configs = 25;
    let mut worst = (0.0, String::new());
    for seed in 0..configs {
        let (params, indices, targets) = common::random_case(seed);
        let (err, at) = common::max_relative_error(&params, &indices, &targets, None);
        if err > worst.0 {
            worst = (err, at);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst.0 < common::TOLERANCE && secs < 60.0;
    (ok, format!("{configs} configs, max relative error {:.2e} ({}), {secs:.2}s", worst.0, worst.1))
}

fn c5_padding() -> (bool, String) {
    let d = desk();
    let n = d.domain.vocabulary().num_actions();
    let untrained = ModelParams::init(n, d.domain.vocabulary().num_fluents(), 8, 8, 3).unwrap();
    let mut r = rng::seeded(5);
    let mut checked = 0;
    for inst in d.test.iter().take(300) {
        let trace = encode_trace(&inst.trace, d.domain.vocabulary()).unwrap();
        let random: Vec<usize> = (0..r.gen_range(1..12)).map(|_| r.gen_range(1..=n)).collect();
        for base in [trace, random] {
            for params in [&d.params, &untrained] {
                let reference = forward(&base, params).unwrap();
                for pads in 1..=8 {
                    let mut padded = base.clone();
                    padded.extend(std::iter::repeat_n(PAD_INDEX, pads));
                    if forward(&padded, params).unwrap() != reference {
                        return (false, format!("output changed with {pads} padding indices"));
                    }
                    checked += 1;
                }
            }
        }
    }
    (true, format!("{checked} padded traces, all outputs bitwise equal"))
}

fn c6_learning() -> (bool, String) {
    let d = desk();
    let acc = |obs: f64| d.table.row(obs).map(|r| r.accuracy).unwrap_or(f64::NAN);
    let (a30, a50, a70) = (acc(0.3), acc(0.5), acc(0.7));
    let chance = d.table.row(0.7).map(|r| r.chance).unwrap_or(f64::NAN);
    let ok = d.test.len() >= 600
        && d.pairs.len() == TRAIN_PAIRS
        && a70 >= 60.0
        && a70 >= 4.0 * chance
        && a70 >= a50
        && a50 >= a30 - 2.0;
    (
        ok,
        format!(
            "accuracy 30%={a30:.2} 50%={a50:.2} 70%={a70:.2}, chance {chance:.2} (4x = {:.2}), {} test instances",
            4.0 * chance,
            d.test.len()
        ),
    )
}

fn c7_difficulty() -> (bool, String) {
    let d = desk();
    let low = pooled_accuracy(&d.records, 0.3, 1..=3);
    let high = pooled_accuracy(&d.records, 0.3, 7..=9);
    match (low, high) {
        (Some((nl, al)), Some((nh, ah))) => (
            nl >= 100 && nh >= 100 && ah > al,
            format!("C1-C3: {al:.2}% over {nl}; C7-C9: {ah:.2}% over {nh}"),
        ),
        _ => (false, format!("empty pool: C1-C3 {low:?}, C7-C9 {high:?}")),
    }
}

fn c8_latency() -> (bool, String) {
    let d = desk();
    let n = d.records.len();
    let mean = d.records.iter().map(|r| r.latency).sum::<f64>() / n as f64;
    (n >= 1000 && mean < 0.1, format!("mean {:.3} ms over {n} instances", mean * 1e3))
}

fn c9_determinism() -> (bool, String) {
    let d = desk();
    let vocab = d.domain.vocabulary();
    let cfg = ModelConfig {
        epochs: 2,
        dropout: 0.1,
        recurrent_dropout: 0.1,
        ..d.config.clone()
    };
    let subset = &d.pairs[..1000];
    let (a, ra) = train(subset, &cfg, vocab).unwrap();
    let (b, rb) = train(subset, &cfg, vocab).unwrap();
    let same_training = a == b && ra.history == rb.history;

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("desk.grnt");
    let ckpt = Checkpoint::new(d.config.clone(), vocab, d.params.clone(), Vec::new());
    save_checkpoint(&path, &ckpt).unwrap();
    let loaded = load_checkpoint(&path, Some(vocab)).unwrap();
    let mut r = rng::seeded(9);
    let n = vocab.num_actions();
    let mut same_outputs = true;
    for _ in 0..100 {
        let trace: Vec<usize> = (0..r.gen_range(1..15)).map(|_| r.gen_range(1..=n)).collect();
        let x = forward(&trace, &d.params).unwrap();
        let y = forward(&trace, &loaded.params).unwrap();
        same_outputs &= x.0.iter().zip(&y.0).all(|(p, q)| p.to_bits() == q.to_bits());
    }
    (
        same_training && same_outputs,
        format!("repeat training identical: {same_training}; reload forward identical on 100 traces: {same_outputs}"),
    )
}

fn c10_plans() -> (bool, String) {
    let mut valid = 0;
    let total = 10_000u64;
    for i in 0..total {
        let n = 3 + (i % 8) as usize;
        let domain = Blocksworld::new(n).unwrap();
        let mut r = rng::seeded(rng::derive(10, i));
        let size = r.gen_range(1..=n);
        let goal = domain.random_goal(size, rng::derive(11, i)).unwrap();
        let init = domain.random_state(rng::derive(12, i));
        let ok = domain
            .generate_plan(&init, &goal, rng::derive(13, i))
            .and_then(|plan| domain.simulate(&init, &plan))
            .is_ok_and(|end| is_goal_satisfied(&end, &goal));
        valid += ok as u64;
    }
    (valid == total, format!("{valid}/{total} plans valid and goal-achieving"))
}

fn main() {
    let criteria: [(u32, &str, Check); 10] = [
        (1, "recognizability reproduction", c1_recognizability),
        (2, "vocabulary counts", c2_vocabulary),
        (3, "score and selection reproduction", c3_scores),
        (4, "gradient correctness", c4_gradients),
        (5, "padding neutrality", c5_padding),
        (6, "desk-scale learning", c6_learning),
        (7, "difficulty trend", c7_difficulty),
        (8, "latency", c8_latency),
        (9, "determinism and persistence", c9_determinism),
        (10, "plan validity", c10_plans),
    ];
    let mut failed = 0;
    for (n, name, check) in criteria {
        let (ok, detail) = match catch_unwind(AssertUnwindSafe(check)) {
            Ok(outcome) => outcome,
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        println!("{} criterion {n:>2} ({name}): {detail}", if ok { "PASS" } else { "FAIL" });
        failed += (!ok) as u32;
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
