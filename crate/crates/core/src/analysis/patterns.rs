//! Forward-model (activation) patterns of linear classifiers.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::N_CHANNELS;
use crate::dsp::Band;
use crate::error::{Error, Result};
use crate::learners::{FeatureMatrix, LinearSvmModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPattern {
    /// Label the weight vector scores (the positive class of a binary model).
    pub label: String,
    /// Unit-norm pattern over the model's features.
    pub values: Vec<f64>,
}

/// Per-band slice of a pattern, as read by the plotting scripts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPattern {
    pub band: String,
    pub channel_values: Vec<f64>,
}

/// Column covariance (divisor n − 1) of `rows`.
pub fn covariance(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let n = rows.len();
    if n < 2 {
        return Err(Error::Insufficient(format!("covariance needs two rows, got {n}")));
    }
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v / n as f64;
        }
    }
    let mut cov = vec![vec![0.0; d]; d];
    for r in rows {
        let c: Vec<f64> = r.iter().zip(&mean).map(|(v, m)| v - m).collect();
        for i in 0..d {
            for j in i..d {
                cov[i][j] += c[i] * c[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            cov[i][j] /= (n - 1) as f64;
            cov[j][i] = cov[i][j];
        }
    }
    Ok(cov)
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.into_iter().map(|x| x / norm).collect()
    } else {
        v
    }
}

/// `a = Σ_X w` for every weight vector of `model`, normalized to unit
/// length. `train` is the (scaled) matrix the model was fit on.
pub fn forward_model_pattern(model: &LinearSvmModel, train: &FeatureMatrix) -> Result<Vec<ClassPattern>> {
    if model.dim() != train.dim() {
        return Err(Error::Dimension {
            expected: model.dim(),
            got: train.dim(),
        });
    }
    let cov = covariance(&train.rows)?;
    let labels: Vec<usize> = if model.weights.len() == 1 {
        vec![model.classes[1]]
    } else {
        model.classes.clone()
    };
    Ok(model
        .weights
        .iter()
        .zip(labels)
        .map(|(w, label)| ClassPattern {
            label: train.label_names.get(label).cloned().unwrap_or_else(|| label.to_string()),
            values: unit(cov.iter().map(|row| row.iter().zip(w).map(|(a, b)| a * b).sum()).collect()),
        })
        .collect())
}

/// Splits a pattern over `<band>_e<channel>` columns into 105-channel
/// blocks, one per band, in column order.
pub fn band_patterns(values: &[f64], feature_names: &[String]) -> Result<Vec<BandPattern>> {
    if values.len() != feature_names.len() || values.len() % N_CHANNELS != 0 || values.is_empty() {
        return Err(Error::Dimension {
            expected: feature_names.len().max(N_CHANNELS),
            got: values.len(),
        });
    }
    values
        .chunks(N_CHANNELS)
        .zip(feature_names.chunks(N_CHANNELS))
        .map(|(v, names)| {
            let band = names[0]
                .rsplit_once("_e")
                .map(|(b, _)| b.to_string())
                .ok_or_else(|| Error::Data(format!("{} is not a channel feature", names[0])))?;
            Band::parse(&band)?;
            for (c, name) in names.iter().enumerate() {
                if *name != format!("{band}_e{c}") {
                    return Err(Error::Data(format!("expected {band}_e{c}, found {name}")));
                }
            }
            Ok(BandPattern {
                band,
                channel_values: v.to_vec(),
            })
        })
        .collect()
}

/// Writes `patterns_<band>.json` per band into `dir`.
pub fn write_band_patterns(patterns: &[BandPattern], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for p in patterns {
        let path = dir.join(format!("patterns_{}.json", p.band));
        let mut text = serde_json::to_string_pretty(p)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
