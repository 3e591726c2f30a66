//! Sweeps over the share of fixations used for EEG features and over the
//! number of recording blocks available for training.

use std::collections::BTreeSet;
use std::io::Write;

use rand::seq::IndexedRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::protocols::{run_svm_item, within_subject_sentence, EvalConfig};
use super::report::REPORT_SCHEMA_VERSION;
use super::splits::{subject_units, WorkItem};
use crate::corpus::{Corpus, TaskLabel};
use crate::dsp::Band;
use crate::eeg::ABLATION_FRACTIONS;
use crate::error::{Error, Result};
use crate::features::{assemble_ablated, FeatureContext};
use crate::learners::{FeatureMatrix, SvmParams};
use crate::seed::{derive_seed, rng_for};
use crate::seed_path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixationAblationRow {
    pub subject_id: String,
    pub fraction: f64,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixationAblationReport {
    pub schema_version: u32,
    pub band: Band,
    pub master_seed: u64,
    pub fractions: Vec<f64>,
    /// Median over subjects, per fraction.
    pub medians: Vec<f64>,
    /// Subject-major, one row per fraction.
    pub rows: Vec<FixationAblationRow>,
    pub config: serde_json::Value,
}

impl FixationAblationReport {
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "subject_id,fraction,accuracy")?;
        for r in &self.rows {
            writeln!(w, "{},{},{}", r.subject_id, r.fraction, r.accuracy)?;
        }
        Ok(())
    }
}

/// Within-subject sentence-level accuracy of `band` EEG averaged over the
/// first 10, 20, 50, 75 and 100 % of each sentence's fixations. Every
/// fraction uses the same split seeds.
pub fn fixation_ablation(
    corpus: &Corpus,
    band: Band,
    ctx: &FeatureContext,
    cfg: &EvalConfig,
    master: u64,
) -> Result<FixationAblationReport> {
    let reports = ABLATION_FRACTIONS
        .iter()
        .map(|&p| within_subject_sentence(&assemble_ablated(corpus, band, p, ctx)?, cfg, master))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for u in &reports[0].subjects {
        for (&fraction, r) in ABLATION_FRACTIONS.iter().zip(&reports) {
            let acc = r
                .subjects
                .iter()
                .find(|x| x.subject_id == u.subject_id)
                .map(|x| x.accuracy)
                .ok_or_else(|| Error::Data(format!("subject {} missing at fraction {fraction}", u.subject_id)))?;
            rows.push(FixationAblationRow {
                subject_id: u.subject_id.clone(),
                fraction,
                accuracy: acc,
            });
        }
    }
    Ok(FixationAblationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        band,
        master_seed: master,
        fractions: ABLATION_FRACTIONS.to_vec(),
        medians: reports.iter().map(|r| r.median).collect(),
        rows,
        config: serde_json::to_value(cfg)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockAblationConfig {
    /// Training blocks per task.
    pub k_values: Vec<usize>,
    pub repeats: usize,
    pub svm: SvmParams,
}

impl Default for BlockAblationConfig {
    fn default() -> Self {
        BlockAblationConfig {
            k_values: (1..=6).collect(),
            repeats: 10,
            svm: SvmParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockAblationPoint {
    pub k: usize,
    /// Mean and sample std over repeats of the subject-mean accuracy.
    pub mean: f64,
    pub std: f64,
    pub accuracies: Vec<f64>,
    /// Training rows per model, averaged over subjects and repeats.
    pub mean_train_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockAblationReport {
    pub schema_version: u32,
    pub feature_set: String,
    pub master_seed: u64,
    pub points: Vec<BlockAblationPoint>,
    pub config: BlockAblationConfig,
}

impl BlockAblationReport {
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "k,mean,std,mean_train_size")?;
        for p in &self.points {
            writeln!(w, "{},{},{},{}", p.k, p.mean, p.std, p.mean_train_size)?;
        }
        Ok(())
    }
}

fn blocks_of(m: &FeatureMatrix, idx: &[usize], task: TaskLabel) -> Vec<u32> {
    idx.iter()
        .filter(|&&i| m.groups[i].task == task)
        .map(|&i| m.groups[i].block_id)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// For each k, per subject: train on k random NR blocks and k random TSR
/// blocks, test on every other block of that subject.
pub fn block_ablation(m: &FeatureMatrix, cfg: &BlockAblationConfig, master: u64) -> Result<BlockAblationReport> {
    m.validate()?;
    let k_max = cfg.k_values.iter().copied().max().unwrap_or(0);
    if cfg.k_values.contains(&0) || k_max == 0 || cfg.repeats == 0 {
        return Err(Error::Parameter(format!(
            "k values must be positive and repeats at least 1 ({:?}, {})",
            cfg.k_values, cfg.repeats
        )));
    }
    let units = subject_units(&m.groups);
    let mut blocks = Vec::new();
    for (unit, idx) in &units {
        let nr = blocks_of(m, idx, TaskLabel::NR);
        let tsr = blocks_of(m, idx, TaskLabel::TSR);
        if nr.len().min(tsr.len()) <= k_max {
            return Err(Error::Insufficient(format!(
                "subject {unit}: {} NR and {} TSR blocks, at least {} of each needed",
                nr.len(),
                tsr.len(),
                k_max + 1
            )));
        }
        blocks.push([nr, tsr]);
    }
    let mut items = Vec::new();
    for &k in &cfg.k_values {
        for r in 0..cfg.repeats {
            for ((unit, idx), [nr, tsr]) in units.iter().zip(&blocks) {
                let mut rng = rng_for(master, seed_path!["block-ablation", unit.as_str(), k, r, "blocks"]);
                let chosen: BTreeSet<u32> = nr
                    .choose_multiple(&mut rng, k)
                    .chain(tsr.choose_multiple(&mut rng, k))
                    .copied()
                    .collect();
                let (train, test): (Vec<usize>, Vec<usize>) =
                    idx.iter().partition(|&&i| chosen.contains(&m.groups[i].block_id));
                items.push(WorkItem {
                    unit: unit.clone(),
                    repeat: r,
                    seed: derive_seed(master, seed_path!["block-ablation", unit.as_str(), k, r, "model"]),
                    train,
                    test,
                });
            }
        }
    }
    let runs = items
        .par_iter()
        .map(|it| run_svm_item(m, it, &cfg.svm))
        .collect::<Result<Vec<_>>>()?;
    let per_k = cfg.repeats * units.len();
    let points = cfg
        .k_values
        .iter()
        .zip(runs.chunks(per_k))
        .map(|(&k, chunk)| {
            let accuracies: Vec<f64> = chunk
                .chunks(units.len())
                .map(|rep| rep.iter().map(|r| r.accuracy).sum::<f64>() / rep.len() as f64)
                .collect();
            let n = accuracies.len() as f64;
            let mean = accuracies.iter().sum::<f64>() / n;
            let std = if accuracies.len() > 1 {
                (accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            BlockAblationPoint {
                k,
                mean,
                std,
                accuracies,
                mean_train_size: chunk.iter().map(|r| r.n_train as f64).sum::<f64>() / chunk.len() as f64,
            }
        })
        .collect();
    Ok(BlockAblationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        feature_set: m.set_name.clone(),
        master_seed: master,
        points,
        config: cfg.clone(),
    })
}
