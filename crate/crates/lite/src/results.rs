//! The results file: one header line and one comma-separated line per run.

use std::io::{Read, Write};

use crate::harness::{Algorithm, Run, RunRecord, Status};

pub const HEADER: [&str; 9] = [
    "dataset",
    "algorithm",
    "policy",
    "budget",
    "repeat",
    "seed",
    "labels_used",
    "best_d2h",
    "status",
];

const FAILED: &str = "failed: ";

#[derive(Debug, thiserror::Error)]
pub enum ResultsError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: bad {field} `{value}`")]
    Field {
        line: u64,
        field: &'static str,
        value: String,
    },
    #[error("unexpected header {0:?}")]
    Header(Vec<String>),
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// Writes records. Floats use the shortest text that reads back to the
/// same value, so a file round-trips exactly.
pub fn write_records<W: Write>(out: W, records: &[RunRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for r in records {
        let status = match &r.status {
            Status::Ok => "ok".to_string(),
            Status::Failed(why) => format!("{FAILED}{why}"),
        };
        w.write_record([
            r.dataset.clone(),
            r.algorithm.family().to_string(),
            r.algorithm.policy().map_or("", |p| p.name()).to_string(),
            opt(r.budget),
            r.repeat.to_string(),
            r.seed.to_string(),
            r.labels_used.to_string(),
            opt(r.best_d2h),
            status,
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Wall-clock milliseconds per run, keyed like the results file.
pub fn write_timings<W: Write>(out: W, runs: &[Run]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dataset", "algorithm", "policy", "budget", "repeat", "wall_ms"])?;
    for run in runs {
        let r = &run.record;
        w.write_record([
            r.dataset.clone(),
            r.algorithm.family().to_string(),
            r.algorithm.policy().map_or("", |p| p.name()).to_string(),
            opt(r.budget),
            r.repeat.to_string(),
            format!("{:.3}", run.wall.as_secs_f64() * 1e3),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(input: R) -> Result<Vec<RunRecord>, ResultsError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != HEADER {
        return Err(ResultsError::Header(header));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |field: &'static str, value: &str| ResultsError::Field {
            line,
            field,
            value: value.to_string(),
        };
        let num = |i: usize, field: &'static str| rec[i].parse::<u64>().map_err(|_| bad(field, &rec[i]));
        let algorithm = Algorithm::from_columns(&rec[1], &rec[2]).ok_or_else(|| bad("algorithm", &rec[1]))?;
        let budget = match &rec[3] {
            "" => None,
            b => Some(b.parse().map_err(|_| bad("budget", b))?),
        };
        let best_d2h = match &rec[7] {
            "" => None,
            d => Some(d.parse::<f64>().map_err(|_| bad("best_d2h", d))?),
        };
        let status = match &rec[8] {
            "ok" => Status::Ok,
            s => Status::Failed(s.strip_prefix(FAILED).ok_or_else(|| bad("status", s))?.to_string()),
        };
        out.push(RunRecord {
            dataset: rec[0].to_string(),
            algorithm,
            budget,
            repeat: num(4, "repeat")? as usize,
            seed: num(5, "seed")?,
            labels_used: num(6, "labels_used")? as usize,
            best_d2h,
            status,
        });
    }
    Ok(out)
}
