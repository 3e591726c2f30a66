use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::corpus::{Corpus, TaskLabel};
use crate::error::{Error, Result};
use crate::gaze::sentence_gaze_features;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation.
    pub std: f64,
}

impl Summary {
    pub fn of(v: &[f64]) -> Summary {
        let n = v.len();
        let mean = v.iter().sum::<f64>() / n.max(1) as f64;
        let std = if n > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Summary { n, mean, std }
    }
}

/// Two-sided p-value of Welch's unequal-variance t-test.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::Insufficient(format!(
            "Welch's test needs two values per group, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (sa, sb) = (Summary::of(a), Summary::of(b));
    let (va, vb) = (sa.std.powi(2) / sa.n as f64, sb.std.powi(2) / sb.n as f64);
    let diff = sa.mean - sb.mean;
    if va + vb == 0.0 {
        return Ok(if diff == 0.0 { 1.0 } else { 0.0 });
    }
    let t = diff / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (sa.n - 1) as f64 + vb * vb / (sb.n - 1) as f64);
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Numeric(format!("t distribution: {e}")))?;
    Ok((2.0 * dist.cdf(-t.abs())).min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescriptiveRow {
    pub quantity: String,
    pub nr: Summary,
    pub tsr: Summary,
    pub p_value: f64,
}

/// Per-task sentence length (words), reading time (s per sentence) and
/// omission rate over all sentences, with Welch p-values.
pub fn descriptive_stats(corpus: &Corpus) -> Result<Vec<DescriptiveRow>> {
    let mut values: [[Vec<f64>; 3]; 2] = Default::default();
    for s in corpus.subjects.iter().flat_map(|s| &s.sentences) {
        let k = match s.task_label {
            TaskLabel::NR => 0,
            TaskLabel::TSR => 1,
            TaskLabel::SR => continue,
        };
        let g = sentence_gaze_features(s)?;
        values[k][0].push(s.words.len() as f64);
        values[k][1].push(s.total_reading_ms / 1000.0);
        values[k][2].push(g.omission_rate);
    }
    if values[0][0].is_empty() || values[1][0].is_empty() {
        return Err(Error::Data("descriptive statistics need both NR and TSR sentences".into()));
    }
    ["sentence_length", "reading_speed", "omission_rate"]
        .iter()
        .enumerate()
        .map(|(q, name)| {
            Ok(DescriptiveRow {
                quantity: name.to_string(),
                nr: Summary::of(&values[0][q]),
                tsr: Summary::of(&values[1][q]),
                p_value: welch_t_test(&values[0][q], &values[1][q])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synthesize_corpus, SynthSpec};

    #[test]
    fn welch_reference_value() {
        // scipy.stats.ttest_ind(a, b, equal_var=False).pvalue
        let a = [27.5, 21.0, 19.0, 23.6, 17.0, 17.9, 16.9, 20.1, 21.9, 22.6, 23.1, 19.6, 19.0, 21.7, 21.4];
        let b = [27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0, 24.8, 20.2, 21.9, 22.1, 22.9, 20.5, 24.4];
        let p = welch_t_test(&a, &b).unwrap();
        assert!((p - 0.021378001462866985).abs() < 1e-9, "{p}");
    }

    #[test]
    fn identical_groups_give_p_one() {
        let a = [0.1, 0.4, 0.35, 0.8];
        assert!((welch_t_test(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(welch_t_test(&[2.0, 2.0], &[2.0, 2.0]).unwrap(), 1.0);
        assert_eq!(welch_t_test(&[1.0], &a).unwrap_err().kind(), "insufficient");
    }

    #[test]
    fn planted_shift_is_significant() {
        let a: Vec<f64> = (0..20).map(|i| (i % 5) as f64 * 0.1).collect();
        let sd = Summary::of(&a).std;
        let b: Vec<f64> = a.iter().map(|x| x + 10.0 * sd).collect();
        assert!(welch_t_test(&a, &b).unwrap() < 1e-6);
    }

    #[test]
    fn synthetic_defaults() {
        let c = synthesize_corpus(&SynthSpec::default(), 1).unwrap();
        let rows = descriptive_stats(&c).unwrap();
        let om = &rows[2];
        assert_eq!(om.quantity, "omission_rate");
        assert!((om.nr.mean - 0.32).abs() < 0.02 && (om.tsr.mean - 0.47).abs() < 0.02, "{om:?}");
        assert!(om.p_value < 0.002);
        let nr_only = Corpus {
            dataset_id: "x".into(),
            subjects: c
                .subjects
                .iter()
                .map(|s| {
                    let mut s = s.clone();
                    s.sentences.retain(|r| r.task_label == TaskLabel::NR);
                    s
                })
                .collect(),
        };
        assert_eq!(descriptive_stats(&nr_only).unwrap_err().kind(), "data");
    }
}
