use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{assemble_feature_set, FeatureContext};
use crate::learners::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub feature: String,
    /// (subject_id, mean unscaled feature value).
    pub subject_means: Vec<(String, f64)>,
    pub group_mean: f64,
    /// Sample standard deviation of the subject means.
    pub group_std: f64,
    pub outliers: Vec<String>,
}

/// Subjects whose mean value lies more than two standard deviations from
/// the mean of all subject means. Nothing is flagged when the spread is 0.
pub fn outliers_from_means(feature: &str, subject_means: Vec<(String, f64)>) -> Result<OutlierReport> {
    let n = subject_means.len();
    if n < 3 {
        return Err(Error::Insufficient(format!("outlier detection needs at least 3 subjects, got {n}")));
    }
    let mean = subject_means.iter().map(|s| s.1).sum::<f64>() / n as f64;
    let std = (subject_means.iter().map(|s| (s.1 - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let outliers = if std > 0.0 {
        subject_means
            .iter()
            .filter(|s| (s.1 - mean).abs() > 2.0 * std)
            .map(|s| s.0.clone())
            .collect()
    } else {
        Vec::new()
    };
    Ok(OutlierReport {
        feature: feature.to_string(),
        subject_means,
        group_mean: mean,
        group_std: std,
        outliers,
    })
}

/// Per-subject means of a single-column matrix.
pub fn subject_means(m: &FeatureMatrix) -> Result<Vec<(String, f64)>> {
    if m.dim() != 1 {
        return Err(Error::Parameter(format!(
            "{} has {} columns; outliers are computed on a single feature",
            m.set_name,
            m.dim()
        )));
    }
    Ok(crate::evaluation::subject_units(&m.groups)
        .into_iter()
        .map(|(s, idx)| {
            let v = idx.iter().map(|&i| m.rows[i][0]).sum::<f64>() / idx.len() as f64;
            (s, v)
        })
        .collect())
}

/// Outlier subjects for a one-column sentence feature such as
/// `max_sacc_dur` or `omission_rate`.
pub fn detect_outliers(corpus: &Corpus, feature: &str, ctx: &FeatureContext) -> Result<OutlierReport> {
    let m = assemble_feature_set(corpus, feature, ctx)?;
    outliers_from_means(feature, subject_means(&m)?)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn means(v: &[f64]) -> Vec<(String, f64)> {
        v.iter().enumerate().map(|(i, &x)| (format!("S{i:02}"), x)).collect()
    }

    #[test]
    fn planted_subject_is_the_only_outlier() {
        let mut v = vec![1.0, 1.1, 0.9, 1.05, 0.95, 1.0, 1.02, 0.98, 1.01, 0.99];
        let base = crate::analysis::stats::Summary::of(&v);
        v.push(base.mean + 5.0 * base.std);
        let r = outliers_from_means("x", means(&v)).unwrap();
        assert_eq!(r.outliers, vec!["S10".to_string()]);
    }

    #[test]
    fn identical_subjects_flag_nothing() {
        let r = outliers_from_means("x", means(&[2.0; 5])).unwrap();
        assert!(r.outliers.is_empty());
        assert_eq!(outliers_from_means("x", means(&[1.0, 2.0])).unwrap_err().kind(), "insufficient");
    }

    proptest! {
        #[test]
        fn affine_invariant(v in prop::collection::vec(-100.0f64..100.0, 3..15), a in 0.01f64..50.0, b in -100.0f64..100.0, neg in any::<bool>()) {
            let a = if neg { -a } else { a };
            let r1 = outliers_from_means("x", means(&v)).unwrap();
            let w: Vec<f64> = v.iter().map(|x| a * x + b).collect();
            let r2 = outliers_from_means("x", means(&w)).unwrap();
            // Skip draws that sit on the 2-std boundary to rounding precision.
            let z: Vec<f64> = v.iter().map(|x| ((x - r1.group_mean) / r1.group_std).abs()).collect();
            prop_assume!(z.iter().all(|z| (z - 2.0).abs() > 1e-9));
            prop_assert_eq!(r1.outliers, r2.outliers);
        }
    }
}
