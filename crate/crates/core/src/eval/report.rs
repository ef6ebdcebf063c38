//! Report files: JSON Lines evaluation records and CSV summaries.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::metrics::{EvalRecord, MetricsTable};
use super::studies::{BucketRow, SizeRow};
use crate::error::{Error, Result};

pub fn write_records(path: &Path, records: &[EvalRecord]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<EvalRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}

pub fn summary_csv(table: &MetricsTable) -> String {
    let mut s = String::from(
        "configuration,observability,count,accuracy,chance,precision,recall,f1,latency_mean_s,latency_std_s\n",
    );
    for r in &table.rows {
        writeln!(
            s,
            "{},{},{},{:.4},{:.4},{:.4},{:.4},{:.4},{:.6},{:.6}",
            r.configuration,
            r.observability,
            r.count,
            r.accuracy,
            r.chance,
            r.precision,
            r.recall,
            r.f1,
            r.latency_mean,
            r.latency_std
        )
        .expect("writing to a String");
    }
    s
}

pub fn bucket_csv(rows: &[BucketRow]) -> String {
    let mut s = String::from("observability,bucket,count,accuracy,chance\n");
    for r in rows {
        writeln!(
            s,
            "{},C{},{},{:.4},{:.4}",
            r.observability, r.bucket, r.count, r.accuracy, r.chance
        )
        .expect("writing to a String");
    }
    s
}

pub fn size_csv(rows: &[SizeRow]) -> String {
    let mut s = String::from("fraction,train_pairs,observability,accuracy\n");
    for r in rows {
        writeln!(s, "{},{},all,{:.4}", r.fraction, r.train_pairs, r.accuracy).expect("writing to a String");
        for t in &r.table.rows {
            writeln!(s, "{},{},{},{:.4}", r.fraction, r.train_pairs, t.observability, t.accuracy)
                .expect("writing to a String");
        }
    }
    s
}

/// Fixed-width text rendering of a metrics table for terminals.
pub fn summary_text(table: &MetricsTable) -> String {
    let mut s = format!(
        "{:<14} {:>5} {:>6} {:>8} {:>8} {:>8} {:>8} {:>8} {:>12}\n",
        "config", "obs", "count", "acc%", "chance%", "prec%", "rec%", "f1%", "latency ms"
    );
    for r in &table.rows {
        writeln!(
            s,
            "{:<14} {:>5.2} {:>6} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>8.2} {:>6.3}±{:<5.3}",
            r.configuration,
            r.observability,
            r.count,
            r.accuracy,
            r.chance,
            r.precision,
            r.recall,
            r.f1,
            r.latency_mean * 1e3,
            r.latency_std * 1e3
        )
        .expect("writing to a String");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_round_trip() {
        let recs = vec![EvalRecord {
            id: 3,
            observability: 0.3,
            group: 1,
            goal_set_size: 6,
            selected: 2,
            hidden: 2,
            correct: true,
            latency: 1.25e-4,
            recognizability: Some(0.1 + 0.2),
            bucket: Some(3),
        }];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.jsonl");
        write_records(&path, &recs).unwrap();
        assert_eq!(read_records(&path).unwrap(), recs);
    }

    #[test]
    fn csv_has_one_line_per_row() {
        let table = MetricsTable::default();
        assert_eq!(summary_csv(&table).lines().count(), 1);
        assert_eq!(bucket_csv(&[]).lines().count(), 1);
    }
}
