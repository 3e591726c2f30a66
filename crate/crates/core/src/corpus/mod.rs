//! Data model, interchange format and synthetic corpora.

mod io;
mod model;
mod oracle;
mod synth;

pub use io::{eeg_payload_path, load_corpus, save_corpus, CORPUS_FORMAT_VERSION};
pub use model::*;
pub use oracle::{bayes_oracle, OracleEstimate, SynthFeature, MC_DRAWS};
pub use synth::{
    synthesize_corpus, ClassParams, ContinuousSynth, EegLevel, EegSynth, Gaussian, RecordingLayout, SynthSpec,
};
