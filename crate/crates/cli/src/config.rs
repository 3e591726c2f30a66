//! Run configuration: defaults, then the TOML file, then command-line flags.
//!
//! ```toml
//! seed = 1
//! out = "out"
//! corpus = "data/zuco1"
//! exclude_subjects = ["ZPH"]
//! embeddings = "vectors.txt"
//!
//! [eeg]
//! power = "amplitude"        # or "amplitude_squared"
//! subbands = false
//!
//! [eval]
//! runs = 50
//! folds = 3
//! seeds = 5
//! [eval.svm]
//! c = 1.0
//! [eval.lstm]
//! hidden = 64
//!
//! [block_ablation]
//! k_values = [1, 2, 3, 4, 5, 6]
//! repeats = 10
//!
//! [synth]
//! preset = "separate-sessions"   # or "alternating-blocks"
//! no_separation = false
//! [synth.spec]                   # any generator field, merged over the preset
//! n_subjects = 12
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use readtask::corpus::SynthSpec;
use readtask::eeg::EegConfig;
use readtask::evaluation::{BlockAblationConfig, EvalConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::failure::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    SeparateSessions,
    AlternatingBlocks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub preset: Preset,
    pub no_separation: bool,
    /// Field overrides merged over the preset.
    pub spec: Value,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            preset: Preset::SeparateSessions,
            no_separation: false,
            spec: Value::Object(Default::default()),
        }
    }
}

impl SynthConfig {
    pub fn resolve(&self) -> Result<SynthSpec, Failure> {
        let base = match self.preset {
            Preset::SeparateSessions => SynthSpec::default(),
            Preset::AlternatingBlocks => SynthSpec::alternating_blocks(),
        };
        let base = if self.no_separation { base.without_class_separation() } else { base };
        let mut v = serde_json::to_value(&base).map_err(readtask::Error::from)?;
        merge(&mut v, self.spec.clone());
        serde_json::from_value(v).map_err(|e| Failure::Config(format!("[synth.spec]: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub jobs: Option<usize>,
    pub out: PathBuf,
    pub run_id: Option<String>,
    pub corpus: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub exclude_subjects: Vec<String>,
    pub eeg: EegConfig,
    pub eval: EvalConfig,
    pub block_ablation: BlockAblationConfig,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 1,
            jobs: None,
            out: PathBuf::from("out"),
            run_id: None,
            corpus: None,
            embeddings: None,
            exclude_subjects: Vec::new(),
            eeg: EegConfig::default(),
            eval: EvalConfig::default(),
            block_ablation: BlockAblationConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

/// Recursive object merge; non-object values in `overlay` replace.
pub fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Defaults overlaid with the TOML file at `path`, if any.
pub fn load(path: Option<&Path>) -> Result<RunConfig, Failure> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let table: toml::Table = toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let overlay = serde_json::to_value(table).map_err(readtask::Error::from)?;
    let mut v = serde_json::to_value(RunConfig::default()).map_err(readtask::Error::from)?;
    merge(&mut v, overlay);
    serde_json::from_value(v).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}
