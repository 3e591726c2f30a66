//! Train/test index plans. Every plan is a list of independent work items,
//! each carrying its own seed derived from the master seed.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::SampleGroup;
use crate::seed::{derive_seed, rng_for};
use crate::seed_path;

/// One model to train: fit on `train`, score on `test` (row indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkItem {
    /// Subject id, or `pooled` when all subjects are mixed.
    pub unit: String,
    pub repeat: usize,
    pub seed: u64,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub unit: String,
    pub reason: String,
}

pub const POOLED: &str = "pooled";

/// Row indices per subject, subjects in order of first appearance.
pub fn subject_units(groups: &[SampleGroup]) -> Vec<(String, Vec<usize>)> {
    let mut order: Vec<String> = Vec::new();
    let mut map: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, g) in groups.iter().enumerate() {
        let e = map.entry(g.subject_id.as_str()).or_default();
        if e.is_empty() {
            order.push(g.subject_id.clone());
        }
        e.push(i);
    }
    order
        .into_iter()
        .map(|s| {
            let idx = map.remove(s.as_str()).unwrap_or_default();
            (s, idx)
        })
        .collect()
}

fn by_class(idx: &[usize], labels: &[usize]) -> BTreeMap<usize, Vec<usize>> {
    let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &i in idx {
        m.entry(labels[i]).or_default().push(i);
    }
    m
}

/// Random subsample with every class cut to the smallest class count.
pub fn balance(idx: &[usize], labels: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    let classes = by_class(idx, labels);
    let n = classes.values().map(Vec::len).min().unwrap_or(0);
    let mut out: Vec<usize> = classes
        .into_values()
        .flat_map(|mut v| {
            v.shuffle(rng);
            v.truncate(n);
            v
        })
        .collect();
    out.sort_unstable();
    out
}

/// Stratified shuffle split. Each class with at least two members puts
/// `round(fraction · n_c)` of them, clamped to `[1, n_c − 1]`, in the test
/// part; singleton classes stay in training.
pub fn stratified_holdout(
    idx: &[usize],
    labels: &[usize],
    test_fraction: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<usize>, Vec<usize>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (_, mut members) in by_class(idx, labels) {
        members.shuffle(rng);
        let n = members.len();
        let k = if n < 2 {
            0
        } else {
            ((test_fraction * n as f64).round() as usize).clamp(1, n - 1)
        };
        test.extend_from_slice(&members[..k]);
        train.extend_from_slice(&members[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Stratified k-fold test sets; together they partition `idx`.
pub fn stratified_folds(idx: &[usize], labels: &[usize], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<usize>> {
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for (_, mut members) in by_class(idx, labels) {
        members.shuffle(rng);
        for i in members {
            folds[next % k].push(i);
            next += 1;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    folds
}

fn complement(all: &[usize], test: &[usize]) -> Vec<usize> {
    all.iter().copied().filter(|i| test.binary_search(i).is_err()).collect()
}

fn n_classes(idx: &[usize], labels: &[usize]) -> usize {
    by_class(idx, labels).len()
}

fn check_unit(unit: &str, idx: &[usize], labels: &[usize], min_samples: usize) -> std::result::Result<(), Skipped> {
    let reason = if idx.len() < min_samples {
        format!("{} samples, at least {min_samples} needed", idx.len())
    } else if n_classes(idx, labels) < 2 {
        "only one class present".to_string()
    } else {
        return Ok(());
    };
    log::warn!("skipping {unit}: {reason}");
    Err(Skipped {
        unit: unit.to_string(),
        reason,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoldoutPlan {
    pub runs: usize,
    pub test_fraction: f64,
    pub min_samples: usize,
    pub balanced: bool,
}

fn holdout_items(
    unit: &str,
    idx: &[usize],
    labels: &[usize],
    plan: &HoldoutPlan,
    master: u64,
    tag: &str,
) -> Vec<WorkItem> {
    (0..plan.runs)
        .map(|r| {
            let mut rng = rng_for(master, seed_path![tag, unit, r, "split"]);
            let pool = if plan.balanced {
                balance(idx, labels, &mut rng)
            } else {
                idx.to_vec()
            };
            let (train, test) = stratified_holdout(&pool, labels, plan.test_fraction, &mut rng);
            WorkItem {
                unit: unit.to_string(),
                repeat: r,
                seed: derive_seed(master, seed_path![tag, unit, r, "model"]),
                train,
                test,
            }
        })
        .collect()
}

/// Repeated stratified hold-out within each subject.
pub fn plan_within_holdout(
    groups: &[SampleGroup],
    labels: &[usize],
    plan: &HoldoutPlan,
    master: u64,
) -> (Vec<WorkItem>, Vec<Skipped>) {
    let mut items = Vec::new();
    let mut skipped = Vec::new();
    for (unit, idx) in subject_units(groups) {
        match check_unit(&unit, &idx, labels, plan.min_samples) {
            Ok(()) => items.extend(holdout_items(&unit, &idx, labels, plan, master, "within-holdout")),
            Err(s) => skipped.push(s),
        }
    }
    (items, skipped)
}

/// Repeated stratified hold-out over all rows at once.
pub fn plan_pooled_holdout(labels: &[usize], plan: &HoldoutPlan, master: u64) -> Result<Vec<WorkItem>> {
    let idx: Vec<usize> = (0..labels.len()).collect();
    check_unit(POOLED, &idx, labels, plan.min_samples).map_err(|s| Error::Insufficient(s.reason))?;
    Ok(holdout_items(POOLED, &idx, labels, plan, master, "pooled-holdout"))
}

/// Stratified k-fold within each subject, repeated for `seeds` shuffles.
/// Repeat `s · folds + f` tests on fold `f` of shuffle `s`.
pub fn plan_within_kfold(
    groups: &[SampleGroup],
    labels: &[usize],
    folds: usize,
    seeds: usize,
    min_samples: usize,
    master: u64,
) -> Result<(Vec<WorkItem>, Vec<Skipped>)> {
    if folds < 2 {
        return Err(Error::Parameter(format!("need at least 2 folds, got {folds}")));
    }
    let mut items = Vec::new();
    let mut skipped = Vec::new();
    for (unit, idx) in subject_units(groups) {
        if let Err(s) = check_unit(&unit, &idx, labels, min_samples.max(folds)) {
            skipped.push(s);
            continue;
        }
        for s in 0..seeds {
            let mut rng = rng_for(master, seed_path!["within-kfold", unit.as_str(), s, "split"]);
            for (f, test) in stratified_folds(&idx, labels, folds, &mut rng).into_iter().enumerate() {
                let repeat = s * folds + f;
                items.push(WorkItem {
                    unit: unit.clone(),
                    repeat,
                    seed: derive_seed(master, seed_path!["within-kfold", unit.as_str(), repeat, "model"]),
                    train: complement(&idx, &test),
                    test,
                });
            }
        }
    }
    Ok((items, skipped))
}

/// Leave-one-subject-out: one item per subject.
pub fn plan_loso(groups: &[SampleGroup], master: u64) -> Result<Vec<WorkItem>> {
    let units = subject_units(groups);
    if units.len() < 3 {
        return Err(Error::Insufficient(format!(
            "cross-subject evaluation needs at least 3 subjects, got {}",
            units.len()
        )));
    }
    let all: Vec<usize> = (0..groups.len()).collect();
    Ok(units
        .into_iter()
        .map(|(unit, test)| WorkItem {
            seed: derive_seed(master, seed_path!["loso", unit.as_str(), "model"]),
            train: complement(&all, &test),
            unit,
            repeat: 0,
            test,
        })
        .collect())
}
