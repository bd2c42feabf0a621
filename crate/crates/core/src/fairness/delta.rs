use std::collections::HashMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::format_float;

pub const BASELINE: &str = "baseline";
pub const DELTA_CSV_HEADER: [&str; 8] = [
    "scenario_id",
    "method",
    "seed",
    "metric",
    "score",
    "baseline_score",
    "delta",
    "status",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Error,
    Timeout,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Error => "error",
            RunStatus::Timeout => "timeout",
        }
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One metric value of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub scenario_id: String,
    pub method: String,
    pub seed: u64,
    pub metric: String,
    pub score: Option<f64>,
    pub status: RunStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaStatus {
    Ok,
    /// The run itself failed.
    Error,
    Timeout,
    /// No baseline run exists for the same scenario, seed and metric.
    MissingBaseline,
    /// The baseline run failed.
    BaselineFailed,
    /// The metric (or its baseline) is undefined on this split.
    Undefined,
}

impl DeltaStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DeltaStatus::Ok => "ok",
            DeltaStatus::Error => "error",
            DeltaStatus::Timeout => "timeout",
            DeltaStatus::MissingBaseline => "missing_baseline",
            DeltaStatus::BaselineFailed => "baseline_failed",
            DeltaStatus::Undefined => "undefined",
        }
    }
}

impl FromStr for DeltaStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ok" => DeltaStatus::Ok,
            "error" => DeltaStatus::Error,
            "timeout" => DeltaStatus::Timeout,
            "missing_baseline" => DeltaStatus::MissingBaseline,
            "baseline_failed" => DeltaStatus::BaselineFailed,
            "undefined" => DeltaStatus::Undefined,
            other => return Err(Error::Parse {
                line: 0,
                message: format!("unknown delta status `{other}`"),
            }),
        })
    }
}

/// A score relative to the baseline of the same scenario, seed and metric.
/// `delta` is present only when `status` is ok.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaRecord {
    pub scenario_id: String,
    pub method: String,
    pub seed: u64,
    pub metric: String,
    pub score: Option<f64>,
    pub baseline_score: Option<f64>,
    pub delta: Option<f64>,
    pub status: DeltaStatus,
}

/// One delta record per input record, in input order. Problems are
/// recorded in the status column rather than aborting.
pub fn delta_scores(records: &[ScoreRecord]) -> Vec<DeltaRecord> {
    let baselines: HashMap<(&str, u64, &str), &ScoreRecord> = records
        .iter()
        .filter(|r| r.method == BASELINE)
        .map(|r| ((r.scenario_id.as_str(), r.seed, r.metric.as_str()), r))
        .collect();
    records
        .iter()
        .map(|r| {
            let base = baselines.get(&(r.scenario_id.as_str(), r.seed, r.metric.as_str()));
            let baseline_score = base.and_then(|b| b.score);
            let status = match (r.status, base) {
                (RunStatus::Error, _) => DeltaStatus::Error,
                (RunStatus::Timeout, _) => DeltaStatus::Timeout,
                (RunStatus::Ok, None) => DeltaStatus::MissingBaseline,
                (RunStatus::Ok, Some(b)) if b.status != RunStatus::Ok => DeltaStatus::BaselineFailed,
                (RunStatus::Ok, Some(_)) if r.score.is_none() || baseline_score.is_none() => {
                    DeltaStatus::Undefined
                }
                _ => DeltaStatus::Ok,
            };
            let delta = match (status, r.score, baseline_score) {
                (DeltaStatus::Ok, Some(s), Some(b)) => Some(s - b),
                _ => None,
            };
            DeltaRecord {
                scenario_id: r.scenario_id.clone(),
                method: r.method.clone(),
                seed: r.seed,
                metric: r.metric.clone(),
                score: r.score,
                baseline_score,
                delta,
                status,
            }
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn write_deltas_csv<W: Write>(records: &[DeltaRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(DELTA_CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.scenario_id.clone(),
            r.method.clone(),
            r.seed.to_string(),
            r.metric.clone(),
            opt(r.score),
            opt(r.baseline_score),
            opt(r.delta),
            r.status.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_deltas_csv<R: Read>(reader: R) -> Result<Vec<DeltaRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != DELTA_CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{}`", DELTA_CSV_HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let bad = |field: &str| Error::Parse {
            line,
            message: format!("invalid {field}"),
        };
        let num = |idx: usize, field: &str| -> Result<Option<f64>> {
            let v = row[idx].trim();
            if v.is_empty() {
                Ok(None)
            } else {
                v.parse().map(Some).map_err(|_| bad(field))
            }
        };
        out.push(DeltaRecord {
            scenario_id: row[0].to_string(),
            method: row[1].to_string(),
            seed: row[2].trim().parse().map_err(|_| bad("seed"))?,
            metric: row[3].to_string(),
            score: num(4, "score")?,
            baseline_score: num(5, "baseline_score")?,
            delta: num(6, "delta")?,
            status: row[7].trim().parse().map_err(|_| bad("status"))?,
        });
    }
    Ok(out)
}
