use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::labels::{relabel, LabelScheme};
use super::report::{median_mad, EvalReport, RunResult, UnitResult, REPORT_SCHEMA_VERSION};
use super::splits::{
    plan_loso, plan_pooled_holdout, plan_within_holdout, plan_within_kfold, HoldoutPlan, Skipped, WorkItem,
};
use crate::error::{Error, Result};
use crate::learners::{fit_scaler, train_bilstm, train_svm, FeatureMatrix, LstmHyper, SequenceDataset, SvmParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    /// Repeated stratified 90/10 hold-out within each subject.
    WithinSentence,
    /// Stratified k-fold within each subject, repeated over seeds.
    WithinWord,
    /// Leave one subject out.
    CrossSubject,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::WithinSentence, Protocol::WithinWord, Protocol::CrossSubject];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::WithinSentence => "within-sentence",
            Protocol::WithinWord => "within-word",
            Protocol::CrossSubject => "cross-subject",
        }
    }

    pub fn parse(s: &str) -> Result<Protocol> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "protocol",
                name: s.to_string(),
                valid: Protocol::ALL.iter().map(|p| p.name().to_string()).collect(),
            })
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub runs: usize,
    pub test_fraction: f64,
    pub folds: usize,
    pub seeds: usize,
    pub min_samples: usize,
    pub balanced: bool,
    pub svm: SvmParams,
    pub lstm: LstmHyper,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            runs: 50,
            test_fraction: 0.1,
            folds: 3,
            seeds: 5,
            min_samples: 10,
            balanced: false,
            svm: SvmParams::default(),
            lstm: LstmHyper::default(),
        }
    }
}

impl EvalConfig {
    fn holdout(&self) -> HoldoutPlan {
        HoldoutPlan {
            runs: self.runs,
            test_fraction: self.test_fraction,
            min_samples: self.min_samples,
            balanced: self.balanced,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 || self.seeds == 0 || self.folds < 2 {
            return Err(Error::Parameter(format!(
                "runs and seeds must be positive and folds at least 2 (runs {}, seeds {}, folds {})",
                self.runs, self.seeds, self.folds
            )));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::Parameter(format!("test_fraction {} outside (0, 1)", self.test_fraction)));
        }
        if !(self.svm.c > 0.0) {
            return Err(Error::Parameter(format!("SVM C must be positive, got {}", self.svm.c)));
        }
        Ok(())
    }
}

fn score(pred: &[usize], truth: &[usize], n_classes: usize) -> (f64, Vec<Vec<usize>>) {
    let mut confusion = vec![vec![0; n_classes]; n_classes];
    let mut correct = 0;
    for (&p, &t) in pred.iter().zip(truth) {
        confusion[t][p] += 1;
        correct += usize::from(p == t);
    }
    (correct as f64 / truth.len().max(1) as f64, confusion)
}

/// Scales with training statistics, trains the SVM and scores the test rows.
pub fn run_svm_item(m: &FeatureMatrix, item: &WorkItem, params: &SvmParams) -> Result<RunResult> {
    let train = m.subset(&item.train);
    let test = m.subset(&item.test);
    let scaler = fit_scaler(&train)?;
    let model = train_svm(&scaler.apply(&train)?, params, item.seed)?;
    let pred = model.predict(&scaler.apply(&test)?.rows)?;
    let (accuracy, confusion) = score(&pred, &test.labels, m.n_classes());
    Ok(RunResult {
        repeat: item.repeat,
        seed: item.seed,
        n_train: train.n_rows(),
        n_test: test.n_rows(),
        accuracy,
        confusion,
    })
}

/// Trains the BiLSTM (which holds out its own validation part of `train`).
pub fn run_lstm_item(ds: &SequenceDataset, item: &WorkItem, hyper: &LstmHyper) -> Result<RunResult> {
    let train = ds.subset(&item.train);
    let test = ds.subset(&item.test);
    let (model, _) = train_bilstm(&train, hyper, item.seed)?;
    let pred = model.predict(&test)?;
    let (accuracy, confusion) = score(&pred, &test.labels, ds.label_names.len());
    Ok(RunResult {
        repeat: item.repeat,
        seed: item.seed,
        n_train: train.len(),
        n_test: test.len(),
        accuracy,
        confusion,
    })
}

struct Meta<'a> {
    protocol: Protocol,
    family: &'static str,
    feature_set: &'a str,
    scheme: LabelScheme,
    label_names: &'a [String],
    cfg: &'a EvalConfig,
    master: u64,
}

fn assemble(meta: Meta, items: &[WorkItem], runs: Vec<RunResult>, skipped: Vec<Skipped>) -> Result<EvalReport> {
    let mut subjects: Vec<UnitResult> = Vec::new();
    for (item, run) in items.iter().zip(runs) {
        match subjects.last_mut() {
            Some(u) if u.subject_id == item.unit => u.runs.push(run),
            _ => subjects.push(UnitResult {
                subject_id: item.unit.clone(),
                accuracy: 0.0,
                runs: vec![run],
            }),
        }
    }
    for u in &mut subjects {
        u.accuracy = u.runs.iter().map(|r| r.accuracy).sum::<f64>() / u.runs.len() as f64;
    }
    let accuracies: Vec<f64> = subjects.iter().map(|u| u.accuracy).collect();
    let (median, mad) = median_mad(&accuracies)
        .map_err(|_| Error::Insufficient(format!("no subject of {} could be evaluated", meta.feature_set)))?;
    Ok(EvalReport {
        schema_version: REPORT_SCHEMA_VERSION,
        protocol: meta.protocol.name().to_string(),
        model_family: meta.family.to_string(),
        feature_set: meta.feature_set.to_string(),
        label_scheme: meta.scheme.name().to_string(),
        label_names: meta.label_names.to_vec(),
        chance_level: 1.0 / meta.label_names.len() as f64,
        master_seed: meta.master,
        accuracies,
        median,
        mad,
        subjects,
        skipped,
        config: serde_json::to_value(meta.cfg)?,
    })
}

fn plan(
    protocol: Protocol,
    groups: &[crate::learners::SampleGroup],
    labels: &[usize],
    cfg: &EvalConfig,
    master: u64,
) -> Result<(Vec<WorkItem>, Vec<Skipped>)> {
    match protocol {
        Protocol::WithinSentence => Ok(plan_within_holdout(groups, labels, &cfg.holdout(), master)),
        Protocol::WithinWord => plan_within_kfold(groups, labels, cfg.folds, cfg.seeds, cfg.min_samples, master),
        Protocol::CrossSubject => Ok((plan_loso(groups, master)?, Vec::new())),
    }
}

/// Linear SVM under `protocol` after relabelling by `scheme`. The subject
/// scheme pools every subject and uses repeated hold-out.
pub fn evaluate_matrix(
    m: &FeatureMatrix,
    protocol: Protocol,
    scheme: LabelScheme,
    cfg: &EvalConfig,
    master: u64,
) -> Result<EvalReport> {
    cfg.validate()?;
    m.validate()?;
    let m = relabel(m, scheme)?;
    let (items, skipped) = if scheme == LabelScheme::Subject {
        if protocol != Protocol::WithinSentence {
            return Err(Error::Parameter(format!(
                "subject labels pool all subjects; use {}, not {protocol}",
                Protocol::WithinSentence
            )));
        }
        (plan_pooled_holdout(&m.labels, &cfg.holdout(), master)?, Vec::new())
    } else {
        plan(protocol, &m.groups, &m.labels, cfg, master)?
    };
    let runs = items
        .par_iter()
        .map(|it| run_svm_item(&m, it, &cfg.svm))
        .collect::<Result<Vec<_>>>()?;
    let meta = Meta {
        protocol,
        family: "svm",
        feature_set: &m.set_name,
        scheme,
        label_names: &m.label_names,
        cfg,
        master,
    };
    assemble(meta, &items, runs, skipped)
}

/// BiLSTM under `protocol` with task labels.
pub fn evaluate_sequences(ds: &SequenceDataset, protocol: Protocol, cfg: &EvalConfig, master: u64) -> Result<EvalReport> {
    cfg.validate()?;
    ds.validate()?;
    let (items, skipped) = plan(protocol, &ds.groups, &ds.labels, cfg, master)?;
    let runs = items
        .par_iter()
        .map(|it| run_lstm_item(ds, it, &cfg.lstm))
        .collect::<Result<Vec<_>>>()?;
    let meta = Meta {
        protocol,
        family: "bilstm",
        feature_set: &ds.set_name,
        scheme: LabelScheme::Task,
        label_names: &ds.label_names,
        cfg,
        master,
    };
    assemble(meta, &items, runs, skipped)
}

/// Sentence-level within-subject evaluation: `cfg.runs` stratified
/// hold-out splits per subject.
pub fn within_subject_sentence(m: &FeatureMatrix, cfg: &EvalConfig, master: u64) -> Result<EvalReport> {
    evaluate_matrix(m, Protocol::WithinSentence, LabelScheme::Task, cfg, master)
}

/// Word-level within-subject evaluation: `cfg.folds`-fold cross-validation
/// repeated for `cfg.seeds` shuffles.
pub fn within_subject_word(ds: &SequenceDataset, cfg: &EvalConfig, master: u64) -> Result<EvalReport> {
    evaluate_sequences(ds, Protocol::WithinWord, cfg, master)
}

pub fn cross_subject_svm(m: &FeatureMatrix, cfg: &EvalConfig, master: u64) -> Result<EvalReport> {
    evaluate_matrix(m, Protocol::CrossSubject, LabelScheme::Task, cfg, master)
}

pub fn cross_subject_bilstm(ds: &SequenceDataset, cfg: &EvalConfig, master: u64) -> Result<EvalReport> {
    evaluate_sequences(ds, Protocol::CrossSubject, cfg, master)
}

/// Session, block or subject classification with the sentence-level SVM.
/// `m` should contain SR rows when session labels are wanted with them.
pub fn relabel_and_classify(m: &FeatureMatrix, scheme: LabelScheme, cfg: &EvalConfig, master: u64) -> Result<EvalReport> {
    evaluate_matrix(m, Protocol::WithinSentence, scheme, cfg, master)
}
