//! Model files: one JSON document per trained model.
//!
//! ```json
//! {"format": "readtask-model", "version": 1, "model": {"kind": "svm", ...}}
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BiLstmModel, LinearSvmModel, ScalerParams};
use crate::error::{Error, Result};

pub const MODEL_FORMAT: &str = "readtask-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SavedModel {
    Svm {
        model: LinearSvmModel,
        scaler: ScalerParams,
        feature_names: Vec<String>,
        label_names: Vec<String>,
    },
    Bilstm {
        model: BiLstmModel,
        feature_names: Vec<String>,
    },
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    format: String,
    version: u32,
    model: SavedModel,
}

pub fn save_model(model: &SavedModel, path: &Path) -> Result<()> {
    let env = Envelope {
        format: MODEL_FORMAT.into(),
        version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<SavedModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let head: serde_json::Value = serde_json::from_str(&text)?;
    let format = head.get("format").and_then(|v| v.as_str()).unwrap_or("");
    let version = head.get("version").and_then(|v| v.as_u64());
    if format != MODEL_FORMAT || version != Some(MODEL_FORMAT_VERSION as u64) {
        return Err(Error::Unsupported(format!(
            "{}: model file format {format:?} version {version:?}, expected {MODEL_FORMAT} {MODEL_FORMAT_VERSION}",
            path.display()
        )));
    }
    let env: Envelope = serde_json::from_value(head)?;
    Ok(env.model)
}
