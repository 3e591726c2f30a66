use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::TaskLabel;
use crate::error::{Error, Result};

/// Provenance of one sample.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SampleGroup {
    pub subject_id: String,
    pub session_id: u32,
    pub block_id: u32,
    pub sentence_id: String,
    pub task: TaskLabel,
}

/// Fixed-width samples for the linear SVM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub set_name: String,
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    /// Index into `label_names`.
    pub labels: Vec<usize>,
    pub label_names: Vec<String>,
    pub groups: Vec<SampleGroup>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.is_empty() {
            return Err(Error::Empty(format!("feature matrix {}", self.set_name)));
        }
        if self.labels.len() != self.rows.len() || self.groups.len() != self.rows.len() {
            return Err(Error::Dimension {
                expected: self.rows.len(),
                got: self.labels.len().min(self.groups.len()),
            });
        }
        let d = self.dim();
        if let Some(r) = self.rows.iter().find(|r| r.len() != d) {
            return Err(Error::Dimension { expected: d, got: r.len() });
        }
        if let Some(&l) = self.labels.iter().find(|&&l| l >= self.label_names.len()) {
            return Err(Error::Range(format!("label id {l} without a name")));
        }
        if self.rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite value in {}", self.set_name)));
        }
        Ok(())
    }

    /// Rows at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            set_name: self.set_name.clone(),
            feature_names: self.feature_names.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            label_names: self.label_names.clone(),
            groups: idx.iter().map(|&i| self.groups[i].clone()).collect(),
        }
    }

    pub fn classes_present(&self) -> BTreeSet<usize> {
        self.labels.iter().copied().collect()
    }

    /// CSV with the feature names as header and the label name last.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{},label", self.feature_names.join(","))?;
        for (row, &l) in self.rows.iter().zip(&self.labels) {
            for v in row {
                write!(w, "{v},")?;
            }
            writeln!(w, "{}", self.label_names[l])?;
        }
        Ok(())
    }
}

/// Variable-length sequences of per-word vectors for the BiLSTM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceDataset {
    pub set_name: String,
    pub feature_names: Vec<String>,
    pub sequences: Vec<Vec<Vec<f64>>>,
    pub labels: Vec<usize>,
    pub label_names: Vec<String>,
    pub groups: Vec<SampleGroup>,
}

impl SequenceDataset {
    pub fn len(&self) -> usize {
        self.sequences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequences.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn max_len(&self) -> usize {
        self.sequences.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sequences.is_empty() {
            return Err(Error::Empty(format!("sequence dataset {}", self.set_name)));
        }
        if self.labels.len() != self.len() || self.groups.len() != self.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                got: self.labels.len().min(self.groups.len()),
            });
        }
        let d = self.dim();
        for s in &self.sequences {
            if s.is_empty() {
                return Err(Error::Empty("zero-length sequence".into()));
            }
            if let Some(x) = s.iter().find(|x| x.len() != d) {
                return Err(Error::Dimension { expected: d, got: x.len() });
            }
        }
        if self.sequences.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite value in {}", self.set_name)));
        }
        Ok(())
    }

    pub fn subset(&self, idx: &[usize]) -> SequenceDataset {
        SequenceDataset {
            set_name: self.set_name.clone(),
            feature_names: self.feature_names.clone(),
            sequences: idx.iter().map(|&i| self.sequences[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            label_names: self.label_names.clone(),
            groups: idx.iter().map(|&i| self.groups[i].clone()).collect(),
        }
    }

    /// Zero-padded to `max_len()` with a validity mask per step.
    pub fn padded(&self) -> (Vec<Vec<Vec<f64>>>, Vec<Vec<bool>>) {
        let t = self.max_len();
        let d = self.dim();
        self.sequences
            .iter()
            .map(|s| {
                let mut x = s.clone();
                x.resize(t, vec![0.0; d]);
                let mask = (0..t).map(|i| i < s.len()).collect();
                (x, mask)
            })
            .unzip()
    }

    /// One row per word, label name last.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "sentence_id,word,{},label", self.feature_names.join(","))?;
        for ((seq, &l), g) in self.sequences.iter().zip(&self.labels).zip(&self.groups) {
            for (i, x) in seq.iter().enumerate() {
                write!(w, "{},{i},", g.sentence_id)?;
                for v in x {
                    write!(w, "{v},")?;
                }
                writeln!(w, "{}", self.label_names[l])?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn group(i: usize) -> SampleGroup {
        SampleGroup {
            subject_id: "S01".into(),
            session_id: 1,
            block_id: 1,
            sentence_id: format!("s{i}"),
            task: TaskLabel::NR,
        }
    }

    /// Matrix from rows and 0/1 labels with generic names.
    pub(crate) fn matrix(rows: Vec<Vec<f64>>, labels: Vec<usize>) -> FeatureMatrix {
        let d = rows[0].len();
        let n_classes = labels.iter().max().unwrap() + 1;
        FeatureMatrix {
            set_name: "test".into(),
            feature_names: (0..d).map(|j| format!("f{j}")).collect(),
            groups: (0..rows.len()).map(group).collect(),
            rows,
            labels,
            label_names: (0..n_classes.max(2)).map(|c| format!("c{c}")).collect(),
        }
    }

    #[test]
    fn validation_catches_shape_errors() {
        let mut m = matrix(vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![0, 1]);
        assert!(m.validate().is_ok());
        m.rows[1].push(5.0);
        assert_eq!(m.validate().unwrap_err().kind(), "dimension");
        let mut m = matrix(vec![vec![1.0], vec![f64::NAN]], vec![0, 1]);
        assert_eq!(m.validate().unwrap_err().kind(), "numeric");
        m.rows.clear();
        assert_eq!(m.validate().unwrap_err().kind(), "empty");
    }

    #[test]
    fn csv_layout() {
        let m = matrix(vec![vec![1.5, -2.0], vec![0.1, 4.0]], vec![0, 1]);
        let mut out = Vec::new();
        m.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "f0,f1,label\n1.5,-2,c0\n0.1,4,c1\n");
    }

    #[test]
    fn padding_and_mask() {
        let ds = SequenceDataset {
            set_name: "t".into(),
            feature_names: vec!["a".into()],
            sequences: vec![vec![vec![1.0]], vec![vec![2.0], vec![3.0]]],
            labels: vec![0, 1],
            label_names: vec!["NR".into(), "TSR".into()],
            groups: vec![group(0), group(1)],
        };
        ds.validate().unwrap();
        let (x, m) = ds.padded();
        assert_eq!(x[0], vec![vec![1.0], vec![0.0]]);
        assert_eq!(m[0], vec![true, false]);
        assert_eq!(m[1], vec![true, true]);
        assert_eq!(ds.subset(&[1]).sequences, vec![vec![vec![2.0], vec![3.0]]]);
    }
}
