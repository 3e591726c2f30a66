//! Evaluation protocols, label schemes, reports and ablations.

mod ablation;
mod labels;
mod protocols;
mod report;
mod splits;

pub use ablation::{
    block_ablation, fixation_ablation, BlockAblationConfig, BlockAblationPoint, BlockAblationReport,
    FixationAblationReport, FixationAblationRow,
};
pub use labels::{relabel, LabelScheme};
pub use protocols::{
    cross_subject_bilstm, cross_subject_svm, evaluate_matrix, evaluate_sequences, relabel_and_classify,
    run_lstm_item, run_svm_item, within_subject_sentence, within_subject_word, EvalConfig, Protocol,
};
pub use report::{median_mad, EvalReport, RunResult, UnitResult, REPORT_SCHEMA_VERSION};
pub use splits::{
    balance, plan_loso, plan_pooled_holdout, plan_within_holdout, plan_within_kfold, stratified_folds,
    stratified_holdout, subject_units, HoldoutPlan, Skipped, WorkItem, POOLED,
};
