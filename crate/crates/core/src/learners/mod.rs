//! Feature scaling, the linear SVM, the bidirectional LSTM and model files.

pub(crate) mod dataset;
mod lstm;
mod persist;
mod scaler;
mod svm;

pub use dataset::{FeatureMatrix, SampleGroup, SequenceDataset};
pub use lstm::{gradient_check, train_bilstm, BiLstmModel, LstmHyper, LstmShape, TrainingLog};
pub use persist::{load_model, save_model, SavedModel, MODEL_FORMAT, MODEL_FORMAT_VERSION};
pub use scaler::{fit_scaler, fit_scaler_rows, ScalerParams};
pub use svm::{primal_objective, train_binary, train_svm, BinaryFit, LinearSvmModel, SvmParams};
