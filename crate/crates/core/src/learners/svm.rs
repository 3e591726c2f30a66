//! Linear SVM trained by dual coordinate descent.
//!
//! Minimizes `½(‖w‖² + b²) + C·Σ max(0, 1 − yᵢ(w·xᵢ + b))`: the bias is an
//! extra weight on a constant feature, so it is regularized too. Several
//! classes are handled one-vs-rest.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};
use crate::seed::rng_for;
use crate::seed_path;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub c: f64,
    /// Stop when (primal − dual) ≤ tol · |primal|.
    pub tol: f64,
    pub max_epochs: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            tol: 1e-4,
            max_epochs: 20_000,
        }
    }
}

/// One hyperplane per class (a single one for two classes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvmModel {
    /// Sorted label ids seen in training.
    pub classes: Vec<usize>,
    /// Binary: one vector scoring `classes[1]`. Otherwise one per class.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
    pub c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryFit {
    pub objective: f64,
    pub duality_gap: f64,
    pub epochs: usize,
    pub converged: bool,
}

/// Primal objective with a regularized bias.
pub fn primal_objective(rows: &[Vec<f64>], y: &[f64], w: &[f64], b: f64, c: f64) -> f64 {
    let reg = 0.5 * (w.iter().map(|v| v * v).sum::<f64>() + b * b);
    let loss: f64 = rows
        .iter()
        .zip(y)
        .map(|(x, &yi)| (1.0 - yi * (dot(w, x) + b)).max(0.0))
        .sum();
    reg + c * loss
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Binary problem with `y ∈ {−1, +1}`; returns `(w, b, fit)`.
pub fn train_binary(rows: &[Vec<f64>], y: &[f64], params: &SvmParams, seed: u64) -> (Vec<f64>, f64, BinaryFit) {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    let c = params.c;
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    let mut alpha = vec![0.0; n];
    let qii: Vec<f64> = rows.iter().map(|x| dot(x, x) + 1.0).collect();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_for(seed, seed_path!["svm-dcd"]);
    let mut fit = BinaryFit {
        objective: f64::INFINITY,
        duality_gap: f64::INFINITY,
        epochs: 0,
        converged: false,
    };
    for epoch in 1..=params.max_epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let x = &rows[i];
            let g = y[i] * (dot(&w, x) + b) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == c {
                g.max(0.0)
            } else {
                g
            };
            if pg.abs() > 1e-14 {
                let old = alpha[i];
                alpha[i] = (old - g / qii[i]).clamp(0.0, c);
                let delta = (alpha[i] - old) * y[i];
                for (wj, xj) in w.iter_mut().zip(x) {
                    *wj += delta * xj;
                }
                b += delta;
            }
        }
        let primal = primal_objective(rows, y, &w, b, c);
        let norm2 = w.iter().map(|v| v * v).sum::<f64>() + b * b;
        let dual = alpha.iter().sum::<f64>() - 0.5 * norm2;
        fit = BinaryFit {
            objective: primal,
            duality_gap: primal - dual,
            epochs: epoch,
            converged: primal - dual <= params.tol * primal.abs().max(1e-12),
        };
        if fit.converged {
            break;
        }
    }
    if !fit.converged {
        log::warn!(
            "SVM stopped after {} epochs with relative gap {:.3e}",
            fit.epochs,
            fit.duality_gap / fit.objective.abs().max(1e-12)
        );
    }
    (w, b, fit)
}

pub fn train_svm(train: &FeatureMatrix, params: &SvmParams, seed: u64) -> Result<LinearSvmModel> {
    train.validate()?;
    if !(params.c > 0.0 && params.c.is_finite()) {
        return Err(Error::Parameter(format!("C must be positive, got {}", params.c)));
    }
    let classes: Vec<usize> = train.classes_present().into_iter().collect();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let targets: Vec<usize> = if classes.len() == 2 { vec![classes[1]] } else { classes.clone() };
    let fits: Vec<(Vec<f64>, f64)> = targets
        .par_iter()
        .map(|&pos| {
            let y: Vec<f64> = train.labels.iter().map(|&l| if l == pos { 1.0 } else { -1.0 }).collect();
            let (w, b, _) = train_binary(&train.rows, &y, params, crate::seed::derive_seed(seed, seed_path![pos]));
            (w, b)
        })
        .collect();
    let (weights, biases) = fits.into_iter().unzip();
    Ok(LinearSvmModel {
        classes,
        weights,
        biases,
        c: params.c,
    })
}

impl LinearSvmModel {
    pub fn dim(&self) -> usize {
        self.weights[0].len()
    }

    pub fn scores(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.weights.iter().zip(&self.biases).map(|(w, b)| dot(w, x) + b).collect())
    }

    /// Binary: `classes[1]` iff the score is strictly positive. Otherwise
    /// the highest score; ties go to the smaller label id.
    pub fn predict_one(&self, x: &[f64]) -> Result<usize> {
        let s = self.scores(x)?;
        if self.classes.len() == 2 {
            return Ok(if s[0] > 0.0 { self.classes[1] } else { self.classes[0] });
        }
        let mut best = 0;
        for k in 1..s.len() {
            if s[k] > s[best] {
                best = k;
            }
        }
        Ok(self.classes[best])
    }

    pub fn predict(&self, rows: &[Vec<f64>]) -> Result<Vec<usize>> {
        rows.iter().map(|x| self.predict_one(x)).collect()
    }
}
