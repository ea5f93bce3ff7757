use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, PartialConfig};
use crate::error::{Error, Result};

/// Outcome of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub successes: u64,
    pub empirical_rate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub exact_prob: Option<f64>,
    pub bound_paper: Option<f64>,
    pub bound_optimized: Option<f64>,
    pub wall_time_ms: f64,
}

impl ExperimentReport {
    pub fn record(&self) -> ReportRecord {
        let c = &self.config;
        ReportRecord {
            problem: Some(c.problem.to_string()),
            q: Some(c.q),
            n: Some(c.n),
            v: c.subset_size(),
            k: Some(c.effective_k()),
            noise: Some(c.noise_label()),
            engine: Some(c.engine.to_string()),
            repetitions: Some(c.repetitions),
            test_samples: Some(c.test_samples),
            p: c.p,
            trials: Some(c.trials),
            seed: Some(c.seed),
            empirical_rate: Some(self.empirical_rate),
            wilson_lo: Some(self.wilson_lo),
            wilson_hi: Some(self.wilson_hi),
            exact_prob: self.exact_prob,
            bound_paper: self.bound_paper,
            bound_optimized: self.bound_optimized,
            wall_time_ms: Some(self.wall_time_ms),
        }
    }
}

/// One CSV row. Field order is the column order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub problem: Option<String>,
    pub q: Option<u64>,
    pub n: Option<usize>,
    pub v: Option<u64>,
    pub k: Option<u64>,
    pub noise: Option<String>,
    pub engine: Option<String>,
    #[serde(rename = "L")]
    pub repetitions: Option<usize>,
    #[serde(rename = "M")]
    pub test_samples: Option<usize>,
    pub p: Option<u64>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub empirical_rate: Option<f64>,
    pub wilson_lo: Option<f64>,
    pub wilson_hi: Option<f64>,
    pub exact_prob: Option<f64>,
    pub bound_paper: Option<f64>,
    pub bound_optimized: Option<f64>,
    pub wall_time_ms: Option<f64>,
}

pub const CSV_HEADER: &str = "problem,q,n,v,k,noise,engine,L,M,p,trials,seed,empirical_rate,wilson_lo,wilson_hi,exact_prob,bound_paper,bound_optimized,wall_time_ms";

/// One sweep row: a finished report or the error that stopped it.
#[derive(Clone, Debug, PartialEq)]
pub enum SweepEntry {
    Done(ExperimentReport),
    Failed {
        config: PartialConfig,
        error: String,
    },
}

impl SweepEntry {
    pub fn record(&self) -> ReportRecord {
        match self {
            SweepEntry::Done(report) => report.record(),
            SweepEntry::Failed { config: c, .. } => ReportRecord {
                problem: c.problem.map(|p| p.to_string()),
                q: c.q,
                n: c.n,
                v: c.v,
                k: c.k,
                noise: None,
                engine: c.engine.map(|e| e.to_string()),
                repetitions: c.repetitions,
                test_samples: c.test_samples,
                p: c.p,
                trials: c.trials,
                seed: c.seed,
                ..Default::default()
            },
        }
    }

    pub fn error(&self) -> Option<&str> {
        match self {
            SweepEntry::Done(_) => None,
            SweepEntry::Failed { error, .. } => Some(error),
        }
    }
}

/// Writes the header and one row per entry, in order.
pub fn write_csv<W: Write>(entries: &[SweepEntry], out: W) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    writer
        .write_record(CSV_HEADER.split(','))
        .map_err(|e| Error::Serialization(e.to_string()))?;
    for entry in entries {
        writer
            .serialize(entry.record())
            .map_err(|e| Error::Serialization(e.to_string()))?;
    }
    writer
        .flush()
        .map_err(|e| Error::Serialization(e.to_string()))
}

#[derive(Serialize)]
struct TextRow {
    #[serde(flatten)]
    record: ReportRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct TextDocument {
    report: Vec<TextRow>,
}

/// TOML document with one `[[report]]` table per entry, mirroring the CSV
/// columns plus an `error` field on failed rows.
pub fn to_text(entries: &[SweepEntry]) -> Result<String> {
    let doc = TextDocument {
        report: entries
            .iter()
            .map(|e| TextRow {
                record: e.record(),
                error: e.error().map(str::to_string),
            })
            .collect(),
    };
    toml::to_string(&doc).map_err(|e| Error::Serialization(e.to_string()))
}
