use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::splits::Skipped;
use crate::error::{Error, Result};

/// Bumped whenever a field of a report changes meaning or name.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Median and unscaled median absolute deviation. Even-length inputs
/// average the two middle values.
pub fn median_mad(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Empty("accuracy list".into()));
    }
    let med = median(values);
    let dev: Vec<f64> = values.iter().map(|v| (v - med).abs()).collect();
    Ok((med, median(&dev)))
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub repeat: usize,
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitResult {
    pub subject_id: String,
    /// Mean over runs.
    pub accuracy: f64,
    pub runs: Vec<RunResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub schema_version: u32,
    pub protocol: String,
    pub model_family: String,
    pub feature_set: String,
    pub label_scheme: String,
    pub label_names: Vec<String>,
    pub chance_level: f64,
    pub master_seed: u64,
    /// Per-subject accuracies, in the order of `subjects`.
    pub accuracies: Vec<f64>,
    pub median: f64,
    pub mad: f64,
    pub subjects: Vec<UnitResult>,
    pub skipped: Vec<Skipped>,
    pub config: serde_json::Value,
}

impl EvalReport {
    /// Confusion counts summed over every run.
    pub fn total_confusion(&self) -> Vec<Vec<usize>> {
        let k = self.label_names.len();
        let mut total = vec![vec![0; k]; k];
        for run in self.subjects.iter().flat_map(|u| &u.runs) {
            for (t, row) in run.confusion.iter().enumerate() {
                for (p, &c) in row.iter().enumerate() {
                    total[t][p] += c;
                }
            }
        }
        total
    }

    pub fn n_models(&self) -> usize {
        self.subjects.iter().map(|u| u.runs.len()).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<EvalReport> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        match v.get("schema_version").and_then(|x| x.as_u64()) {
            Some(n) if n == u64::from(REPORT_SCHEMA_VERSION) => Ok(serde_json::from_value(v)?),
            other => Err(Error::Unsupported(format!(
                "report schema version {other:?}, expected {REPORT_SCHEMA_VERSION}"
            ))),
        }
    }

    /// `subject_id,accuracy,runs` per subject.
    pub fn write_summary_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "subject_id,accuracy,runs")?;
        for u in &self.subjects {
            writeln!(w, "{},{},{}", u.subject_id, u.accuracy, u.runs.len())?;
        }
        Ok(())
    }

    /// Summed confusion matrix; rows are true labels, columns predictions.
    pub fn write_confusion_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "true\\predicted,{}", self.label_names.join(","))?;
        for (name, row) in self.label_names.iter().zip(self.total_confusion()) {
            let cells: Vec<String> = row.iter().map(usize::to_string).collect();
            writeln!(w, "{name},{}", cells.join(","))?;
        }
        Ok(())
    }

    /// Writes `report.json`, `summary.csv` and `confusion_<scheme>.csv`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let p = dir.join("report.json");
        fs::write(&p, self.to_json()?).map_err(|e| Error::io(&p, e))?;
        let mut buf = Vec::new();
        self.write_summary_csv(&mut buf).map_err(|e| Error::io(dir, e))?;
        let p = dir.join("summary.csv");
        fs::write(&p, &buf).map_err(|e| Error::io(&p, e))?;
        buf.clear();
        self.write_confusion_csv(&mut buf).map_err(|e| Error::io(dir, e))?;
        let p = dir.join(format!("confusion_{}.csv", self.label_scheme));
        fs::write(&p, &buf).map_err(|e| Error::io(&p, e))
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn median_mad_examples() {
        assert_eq!(median_mad(&[1.0, 2.0, 3.0]).unwrap(), (2.0, 1.0));
        assert_eq!(median_mad(&[5.0]).unwrap(), (5.0, 0.0));
        let (m, d) = median_mad(&[0.6, 0.6, 0.9, 0.9]).unwrap();
        assert!((m - 0.75).abs() < 1e-12 && (d - 0.15).abs() < 1e-12);
        assert_eq!(median_mad(&[]).unwrap_err().kind(), "empty");
    }

    proptest! {
        #[test]
        fn median_mad_is_order_free(mut v in prop::collection::vec(0.0f64..1.0, 1..30), seed in any::<u64>()) {
            let a = median_mad(&v).unwrap();
            let k = (seed as usize) % v.len();
            v.rotate_left(k);
            v.reverse();
            prop_assert_eq!(median_mad(&v).unwrap(), a);
            prop_assert!(a.1 >= 0.0);
        }
    }
}
