//! `metrics.csv` rows and the success-only summary statistics.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::Outcome;

pub const METRICS_HEADER: [&str; 8] = [
    "arm",
    "seed",
    "start_x",
    "start_y",
    "outcome",
    "time_s",
    "horiz_dist_m",
    "restarts",
];

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub arm: String,
    pub seed: u64,
    pub start_x: f64,
    pub start_y: f64,
    pub outcome: Outcome,
    pub time_s: f64,
    pub horiz_dist_m: f64,
    pub restarts: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub name: String,
    pub episodes: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Over successful episodes only; `null` without successes.
    pub mean_time_s: Option<f64>,
    pub mean_horiz_dist_m: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub arms: Vec<ArmSummary>,
}

impl SummaryStats {
    pub fn arm(&self, name: &str) -> Option<&ArmSummary> {
        self.arms.iter().find(|a| a.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes") + "\n"
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Per-arm counts and success-only means. Arms appear in order of first
/// occurrence in `rows`.
pub fn aggregate(rows: &[MetricsRow]) -> SummaryStats {
    let mut names: Vec<&str> = Vec::new();
    for r in rows {
        if !names.contains(&r.arm.as_str()) {
            names.push(&r.arm);
        }
    }
    let arms = names
        .into_iter()
        .map(|name| {
            let arm_rows: Vec<&MetricsRow> = rows.iter().filter(|r| r.arm == name).collect();
            let wins: Vec<&&MetricsRow> = arm_rows
                .iter()
                .filter(|r| r.outcome == Outcome::Success)
                .collect();
            ArmSummary {
                name: name.to_string(),
                episodes: arm_rows.len(),
                successes: wins.len(),
                success_rate: wins.len() as f64 / arm_rows.len() as f64,
                mean_time_s: mean(wins.iter().map(|r| r.time_s)),
                mean_horiz_dist_m: mean(wins.iter().map(|r| r.horiz_dist_m)),
            }
        })
        .collect();
    SummaryStats { arms }
}

pub fn write_metrics<W: std::io::Write>(out: W, rows: &[MetricsRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(METRICS_HEADER)?;
    for r in rows {
        w.write_record([
            r.arm.clone(),
            r.seed.to_string(),
            r.start_x.to_string(),
            r.start_y.to_string(),
            r.outcome.as_str().to_string(),
            r.time_s.to_string(),
            r.horiz_dist_m.to_string(),
            r.restarts.to_string(),
        ])?;
    }
    w.flush()
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::format(path, e))?;
    let header = rdr.headers().map_err(|e| Error::format(path, e))?.clone();
    if header.iter().ne(METRICS_HEADER) {
        return Err(Error::format(path, format!("unexpected header {header:?}")));
    }
    let bad = |line: usize, what: &str| Error::format(path, format!("row {line}: bad {what}"));
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::format(path, e))?;
        let line = i + 2;
        let num = |idx: usize, what: &str| rec[idx].parse::<f64>().map_err(|_| bad(line, what));
        rows.push(MetricsRow {
            arm: rec[0].to_string(),
            seed: rec[1].parse().map_err(|_| bad(line, "seed"))?,
            start_x: num(2, "start_x")?,
            start_y: num(3, "start_y")?,
            outcome: Outcome::parse(&rec[4]).ok_or_else(|| bad(line, "outcome"))?,
            time_s: num(5, "time_s")?,
            horiz_dist_m: num(6, "horiz_dist_m")?,
            restarts: rec[7].parse().map_err(|_| bad(line, "restarts"))?,
        });
    }
    Ok(rows)
}
