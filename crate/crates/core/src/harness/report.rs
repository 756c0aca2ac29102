//! Evaluation statistics and their CSV form.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Outcome of one rollout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub seed: u64,
    pub ret: f64,
    pub length: usize,
    /// Torso x at the end minus torso x after reset.
    pub displacement: f64,
    /// Steps with no gait-schedule error.
    pub compliant_steps: usize,
    /// Steps whose forward velocity lay inside the tent support.
    pub in_band_steps: usize,
    pub terminated: bool,
}

impl EpisodeStats {
    /// Reached the horizon without terminating.
    pub fn survived(&self) -> bool {
        !self.terminated
    }
}

/// Aggregate over a batch of rollouts of one policy on one morphology.
///
/// `std_return` is the population standard deviation (divide by n), so a
/// single-episode report has zero spread.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub morphology: String,
    pub policy: String,
    pub episodes: Vec<EpisodeStats>,
}

impl EvalReport {
    pub fn new(morphology: &str, policy: &str, episodes: Vec<EpisodeStats>) -> Self {
        EvalReport { morphology: morphology.to_string(), policy: policy.to_string(), episodes }
    }

    pub fn len(&self) -> usize {
        self.episodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.episodes.is_empty()
    }

    pub fn returns(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.ret).collect()
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.episodes.iter().map(|e| e.length).collect()
    }

    fn mean_of(&self, f: impl Fn(&EpisodeStats) -> f64) -> f64 {
        if self.episodes.is_empty() {
            return 0.0;
        }
        self.episodes.iter().map(f).sum::<f64>() / self.episodes.len() as f64
    }

    pub fn mean_return(&self) -> f64 {
        self.mean_of(|e| e.ret)
    }

    pub fn std_return(&self) -> f64 {
        let m = self.mean_return();
        self.mean_of(|e| (e.ret - m).powi(2)).sqrt()
    }

    pub fn mean_displacement(&self) -> f64 {
        self.mean_of(|e| e.displacement)
    }

    fn step_fraction(&self, f: impl Fn(&EpisodeStats) -> usize) -> f64 {
        let total: usize = self.episodes.iter().map(|e| e.length).sum();
        if total == 0 {
            return 0.0;
        }
        self.episodes.iter().map(f).sum::<usize>() as f64 / total as f64
    }

    /// Fraction of all steps with zero gait errors.
    pub fn compliance_rate(&self) -> f64 {
        self.step_fraction(|e| e.compliant_steps)
    }

    /// Fraction of all steps with forward velocity inside the tent support.
    pub fn band_rate(&self) -> f64 {
        self.step_fraction(|e| e.in_band_steps)
    }

    pub fn survival_rate(&self) -> f64 {
        self.mean_of(|e| if e.survived() { 1.0 } else { 0.0 })
    }

    /// CSV rows: one aggregate row, plus one per episode if `per_seed`.
    /// An empty report yields no rows.
    pub fn csv_rows(&self, per_seed: bool) -> Vec<CsvRow> {
        if self.is_empty() {
            return Vec::new();
        }
        let total: usize = self.episodes.iter().map(|e| e.length).sum();
        let mut rows = vec![CsvRow {
            step: total as u64,
            mean_return: self.mean_return(),
            std_return: self.std_return(),
            morphology: self.morphology.clone(),
            policy_name: self.policy.clone(),
        }];
        if per_seed {
            rows.extend(self.episodes.iter().map(|e| CsvRow {
                step: e.length as u64,
                mean_return: e.ret,
                std_return: 0.0,
                morphology: self.morphology.clone(),
                policy_name: format!("{}:seed{}", self.policy, e.seed),
            }));
        }
        rows
    }
}

/// One line of the learning-curve / report CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub step: u64,
    pub mean_return: f64,
    pub std_return: f64,
    pub morphology: String,
    pub policy_name: String,
}

pub const CSV_HEADER: [&str; 5] = ["step", "mean_return", "std_return", "morphology", "policy_name"];

/// Write `rows` to `path`, replacing it. Zero rows gives a header-only file.
pub fn emit_csv(rows: &[CsvRow], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_rows(rows, file, true)
}

/// Append `rows` to `path`, writing the header first if the file is new or empty.
pub fn append_csv(rows: &[CsvRow], path: &Path) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    write_rows(rows, file, fresh)
}

fn write_rows<W: Write>(rows: &[CsvRow], out: W, header: bool) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if header {
        w.write_record(CSV_HEADER)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
