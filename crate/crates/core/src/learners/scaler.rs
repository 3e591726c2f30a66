use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};

/// Per-column training range; columns map affinely onto [−1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn fit_scaler(train: &FeatureMatrix) -> Result<ScalerParams> {
    fit_scaler_rows(&train.rows)
}

pub fn fit_scaler_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<ScalerParams> {
    let first = rows.first().ok_or_else(|| Error::Empty("scaler training data".into()))?.as_ref();
    let mut min = first.to_vec();
    let mut max = first.to_vec();
    for r in rows {
        let r = r.as_ref();
        if r.len() != min.len() {
            return Err(Error::Dimension {
                expected: min.len(),
                got: r.len(),
            });
        }
        for (j, &v) in r.iter().enumerate() {
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    Ok(ScalerParams { min, max })
}

impl ScalerParams {
    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Constant training columns map to 0; test values may leave [−1, 1].
    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| if hi > lo { 2.0 * (v - lo) / (hi - lo) - 1.0 } else { 0.0 })
            .collect()
    }

    pub fn apply(&self, m: &FeatureMatrix) -> Result<FeatureMatrix> {
        if m.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: m.dim(),
            });
        }
        let mut out = m.clone();
        out.rows = m.rows.iter().map(|r| self.transform(r)).collect();
        Ok(out)
    }
}
