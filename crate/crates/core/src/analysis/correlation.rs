use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::corpus::SubjectMeta;
use crate::error::{Error, Result};
use crate::evaluation::EvalReport;

/// Rank correlation; undefined when either input is constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Spearman {
    Defined { rho: f64, p: f64 },
    Undefined,
}

impl Spearman {
    pub fn rho(&self) -> Option<f64> {
        match self {
            Spearman::Defined { rho, .. } => Some(*rho),
            Spearman::Undefined => None,
        }
    }

    pub fn significant(&self, alpha: f64) -> bool {
        matches!(self, Spearman::Defined { p, .. } if *p < alpha)
    }
}

/// 1-based ranks; ties share the average of their positions.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && x[order[j + 1]] == x[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation of average ranks; p from the t approximation with
/// n − 2 degrees of freedom.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<Spearman> {
    if x.len() != y.len() {
        return Err(Error::Dimension {
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::Insufficient(format!("Spearman needs at least 3 pairs, got {n}")));
    }
    let (rx, ry) = (average_ranks(x), average_ranks(y));
    let mean = (n as f64 + 1.0) / 2.0;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mean) * (b - mean);
        sxx += (a - mean).powi(2);
        syy += (b - mean).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(Spearman::Undefined);
    }
    let rho = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let p = if rho.abs() == 1.0 {
        0.0
    } else {
        let t = rho * (df / (1.0 - rho * rho)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::Numeric(format!("t distribution: {e}")))?;
        (2.0 * dist.cdf(-t.abs())).min(1.0)
    };
    Ok(Spearman::Defined { rho, p })
}

pub const COVARIATES: [&str; 5] = ["score_nr", "score_tsr", "speed_nr", "speed_tsr", "lextale"];

fn covariate(m: &SubjectMeta, name: &str) -> f64 {
    match name {
        "score_nr" => m.score_nr,
        "score_tsr" => m.score_tsr,
        "speed_nr" => m.speed_nr,
        "speed_tsr" => m.speed_tsr,
        _ => m.lextale,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub feature_set: String,
    pub protocol: String,
    pub covariate: String,
    pub result: Spearman,
    /// p < 0.05.
    pub significant: bool,
}

/// Spearman correlation of each report's per-subject accuracies with each
/// subject covariate. Report and metadata subject sets must match.
pub fn correlation_table(reports: &[EvalReport], meta: &[SubjectMeta]) -> Result<Vec<CorrelationRow>> {
    let meta_ids: BTreeSet<&str> = meta.iter().map(|m| m.subject_id.as_str()).collect();
    let mut rows = Vec::new();
    for r in reports {
        let ids: BTreeSet<&str> = r.subjects.iter().map(|u| u.subject_id.as_str()).collect();
        if ids != meta_ids {
            return Err(Error::Data(format!(
                "report {} covers subjects {ids:?}, metadata covers {meta_ids:?}",
                r.feature_set
            )));
        }
        let acc: Vec<f64> = r.subjects.iter().map(|u| u.accuracy).collect();
        let metas: Vec<&SubjectMeta> = r
            .subjects
            .iter()
            .map(|u| meta.iter().find(|m| m.subject_id == u.subject_id).expect("sets match"))
            .collect();
        for name in COVARIATES {
            let cov: Vec<f64> = metas.iter().map(|m| covariate(m, name)).collect();
            let result = spearman(&acc, &cov)?;
            rows.push(CorrelationRow {
                feature_set: r.feature_set.clone(),
                protocol: r.protocol.clone(),
                covariate: name.to_string(),
                significant: result.significant(0.05),
                result,
            });
        }
    }
    Ok(rows)
}
