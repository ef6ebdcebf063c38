//! JSON Lines dataset files. Each line is one training pair or one
//! recognition instance, tagged with the domain and vocabulary checksum it
//! was generated against.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GRInstance, ObservationTrace, TrainingPair};
use crate::error::{Error, Result};
use crate::planning::{DomainVocabulary, Fluent, FluentSet};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Pair,
    Instance,
}

/// On-disk record. Field order here is the field order in the file.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    schema: u32,
    kind: Kind,
    domain: String,
    vocab: String,
    id: u64,
    group: u64,
    observations: Vec<String>,
    goals: Vec<Vec<String>>,
    hidden: usize,
    observability: f64,
    plan_len: usize,
    seed: u64,
}

/// Contents of a dataset file, in file order per kind.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub pairs: Vec<TrainingPair>,
    pub instances: Vec<GRInstance>,
}

impl Dataset {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty() && self.instances.is_empty()
    }
}

fn goal_labels(g: &FluentSet) -> Vec<String> {
    g.iter().map(Fluent::label).collect()
}

fn write_records<I>(path: &Path, records: I) -> Result<()>
where
    I: IntoIterator<Item = Record>,
{
    let mut w = BufWriter::new(File::create(path)?);
    for rec in records {
        serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pairs(path: &Path, pairs: &[TrainingPair], vocab: &DomainVocabulary) -> Result<()> {
    let checksum = vocab.checksum();
    write_records(
        path,
        pairs.iter().enumerate().map(|(i, p)| Record {
            schema: SCHEMA_VERSION,
            kind: Kind::Pair,
            domain: vocab.domain_id().to_string(),
            vocab: checksum.clone(),
            id: i as u64,
            group: i as u64,
            observations: p.trace.labels.clone(),
            goals: vec![goal_labels(&p.hidden_goal)],
            hidden: 0,
            observability: p.trace.observability,
            plan_len: p.trace.source_plan_len,
            seed: p.seed,
        }),
    )
}

pub fn write_instances(
    path: &Path,
    instances: &[GRInstance],
    vocab: &DomainVocabulary,
) -> Result<()> {
    let checksum = vocab.checksum();
    write_records(
        path,
        instances.iter().map(|inst| Record {
            schema: SCHEMA_VERSION,
            kind: Kind::Instance,
            domain: vocab.domain_id().to_string(),
            vocab: checksum.clone(),
            id: inst.id,
            group: inst.group,
            observations: inst.trace.labels.clone(),
            goals: inst.goal_set.iter().map(goal_labels).collect(),
            hidden: inst.hidden_goal_index,
            observability: inst.trace.observability,
            plan_len: inst.trace.source_plan_len,
            seed: inst.seed,
        }),
    )
}

fn check_record(rec: &Record, vocab: &DomainVocabulary, checksum: &str) -> std::result::Result<(), String> {
    if rec.schema != SCHEMA_VERSION {
        return Err(format!("unsupported schema version {}", rec.schema));
    }
    if rec.domain != vocab.domain_id() {
        return Err(format!(
            "record is for domain {:?}, vocabulary is {:?}",
            rec.domain,
            vocab.domain_id()
        ));
    }
    if rec.vocab != checksum {
        return Err("vocabulary checksum does not match".into());
    }
    if rec.observations.is_empty() {
        return Err("empty observation list".into());
    }
    if let Some(l) = rec.observations.iter().find(|l| vocab.action_index(l).is_none()) {
        return Err(format!("unknown action label {l:?}"));
    }
    if rec.goals.is_empty() || rec.hidden >= rec.goals.len() {
        return Err(format!(
            "hidden index {} outside goal set of size {}",
            rec.hidden,
            rec.goals.len()
        ));
    }
    if rec.kind == Kind::Pair && rec.goals.len() != 1 {
        return Err("a training pair carries exactly one goal".into());
    }
    for l in rec.goals.iter().flatten() {
        if vocab.fluent_index(l).is_none() {
            return Err(format!("unknown fluent label {l:?}"));
        }
    }
    Ok(())
}

fn parse_goal(labels: &[String]) -> std::result::Result<FluentSet, String> {
    let goal: FluentSet = labels
        .iter()
        .map(|l| Fluent::parse(l).map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    if goal.len() != labels.len() {
        return Err("duplicate fluent in goal".into());
    }
    Ok(goal)
}

/// Domain id of the first record, or `None` for a file without records.
pub fn peek_domain(path: &Path) -> Result<Option<String>> {
    #[derive(Deserialize)]
    struct Head {
        domain: String,
    }
    let reader = BufReader::new(File::open(path)?);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let head: Head = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: e.to_string(),
        })?;
        return Ok(Some(head.domain));
    }
    Ok(None)
}

/// Reads a dataset file, validating every record against `vocab`.
pub fn read_dataset(path: &Path, vocab: &DomainVocabulary) -> Result<Dataset> {
    let reader = BufReader::new(File::open(path)?);
    let checksum = vocab.checksum();
    let mut out = Dataset::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fail = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            msg,
        };
        let rec: Record = serde_json::from_str(&line).map_err(|e| fail(e.to_string()))?;
        check_record(&rec, vocab, &checksum).map_err(fail)?;
        let goals = rec
            .goals
            .iter()
            .map(|g| parse_goal(g))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(fail)?;
        let trace = ObservationTrace {
            labels: rec.observations,
            source_plan_len: rec.plan_len,
            observability: rec.observability,
        };
        match rec.kind {
            Kind::Pair => out.pairs.push(TrainingPair {
                trace,
                hidden_goal: goals.into_iter().next().expect("checked above"),
                seed: rec.seed,
            }),
            Kind::Instance => {
                let inst = GRInstance {
                    id: rec.id,
                    group: rec.group,
                    trace,
                    goal_set: goals,
                    hidden_goal_index: rec.hidden,
                    seed: rec.seed,
                };
                inst.validate().map_err(|e| fail(e.to_string()))?;
                out.instances.push(inst);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_test_instances, generate_training_pairs, TestSetConfig, TrainingSetConfig};
    use crate::planning::Blocksworld;

    #[test]
    fn thousand_pairs_round_trip() {
        let d = Blocksworld::new(6).unwrap();
        let pairs = generate_training_pairs(&d, 1000, &TrainingSetConfig::default(), 11).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("train.jsonl");
        write_pairs(&path, &pairs, d.vocabulary()).unwrap();
        let back = read_dataset(&path, d.vocabulary()).unwrap();
        assert_eq!(back.pairs, pairs);
        assert!(back.instances.is_empty());
    }

    #[test]
    fn instances_round_trip() {
        let d = Blocksworld::new(7).unwrap();
        let cfg = TestSetConfig {
            groups: 5,
            ..TestSetConfig::default()
        };
        let insts = generate_test_instances(&d, &cfg, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("test.jsonl");
        write_instances(&path, &insts, d.vocabulary()).unwrap();
        assert_eq!(read_dataset(&path, d.vocabulary()).unwrap().instances, insts);
    }

    #[test]
    fn unknown_action_reports_line() {
        let d = Blocksworld::new(3).unwrap();
        let pairs = generate_training_pairs(&d, 3, &TrainingSetConfig { goal_size_max: 3, ..Default::default() }, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        write_pairs(&path, &pairs, d.vocabulary()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        let first = pairs[1].trace.labels[0].clone();
        lines[1] = lines[1].replacen(&first, "(Teleport Block_A)", 1);
        std::fs::write(&path, lines.join("\n")).unwrap();
        match read_dataset(&path, d.vocabulary()) {
            Err(Error::Parse { line, msg, .. }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("Teleport"), "{msg}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn other_vocabulary_is_rejected() {
        let d = Blocksworld::new(3).unwrap();
        let pairs = generate_training_pairs(&d, 2, &TrainingSetConfig { goal_size_max: 3, ..Default::default() }, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        write_pairs(&path, &pairs, d.vocabulary()).unwrap();
        let other = Blocksworld::new(4).unwrap();
        assert!(matches!(
            read_dataset(&path, other.vocabulary()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn malformed_json_reports_line() {
        let d = Blocksworld::new(3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.jsonl");
        std::fs::write(&path, "\n{not json\n").unwrap();
        assert!(matches!(
            read_dataset(&path, d.vocabulary()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn domain_is_read_from_the_first_record() {
        let d = Blocksworld::new(3).unwrap();
        let pairs = generate_training_pairs(&d, 2, &TrainingSetConfig { goal_size_max: 3, ..Default::default() }, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.jsonl");
        write_pairs(&path, &pairs, d.vocabulary()).unwrap();
        assert_eq!(peek_domain(&path).unwrap().as_deref(), Some("blocksworld-3"));
        std::fs::write(&path, "\n").unwrap();
        assert_eq!(peek_domain(&path).unwrap(), None);
    }

    #[test]
    fn empty_file_is_empty_dataset() {
        let d = Blocksworld::new(3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.jsonl");
        std::fs::write(&path, "").unwrap();
        assert!(read_dataset(&path, d.vocabulary()).unwrap().is_empty());
    }
}
