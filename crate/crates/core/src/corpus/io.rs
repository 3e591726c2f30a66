//! JSON Lines interchange format.
//!
//! ```text
//! <root>/manifest.json          {format_version, dataset_id, subjects: [{subject_id, lextale, ..., file}]}
//! <root>/<subject>.jsonl        one SentenceRecording per line
//! <root>/<subject>_eeg/<id>.bin optional continuous EEG, f32 LE, channel-major
//! ```
//!
//! Serialization is canonical: struct fields are emitted in declaration
//! order and band maps are ordered, so `save(load(dir))` reproduces the
//! files byte for byte.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::model::{Corpus, SentenceRecording, SubjectData, SubjectMeta};
use crate::error::{Error, Result};

pub const CORPUS_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    format_version: u32,
    dataset_id: String,
    subjects: Vec<ManifestSubject>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestSubject {
    #[serde(flatten)]
    meta: SubjectMeta,
    file: String,
}

pub fn load_corpus(root: impl AsRef<Path>) -> Result<Corpus> {
    let root = root.as_ref();
    let manifest_path = root.join("manifest.json");
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        file: manifest_path.clone(),
        line: e.line(),
        message: e.to_string(),
    })?;
    if manifest.format_version != CORPUS_FORMAT_VERSION {
        return Err(Error::Unsupported(format!(
            "corpus format version {} (supported: {CORPUS_FORMAT_VERSION})",
            manifest.format_version
        )));
    }

    let mut subjects = Vec::with_capacity(manifest.subjects.len());
    for entry in manifest.subjects {
        let path = root.join(&entry.file);
        let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut sentences = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(&path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut rec: SentenceRecording = serde_json::from_str(&line).map_err(|e| Error::Parse {
                file: path.clone(),
                line: i + 1,
                message: e.to_string(),
            })?;
            if let Some(eeg) = rec.continuous_eeg.as_mut() {
                eeg.data = read_f32_le(&root.join(&eeg.file))?;
            }
            sentences.push(rec);
        }
        subjects.push(SubjectData {
            meta: entry.meta,
            sentences,
        });
    }

    let corpus = Corpus {
        dataset_id: manifest.dataset_id,
        subjects,
    };
    corpus.validate()?;
    Ok(corpus)
}

/// Writes `corpus` under `root`, creating the directory. Continuous EEG
/// payloads are written to the paths recorded in each sentence.
pub fn save_corpus(corpus: &Corpus, root: impl AsRef<Path>) -> Result<()> {
    let root = root.as_ref();
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
    let mut manifest = Manifest {
        format_version: CORPUS_FORMAT_VERSION,
        dataset_id: corpus.dataset_id.clone(),
        subjects: Vec::with_capacity(corpus.subjects.len()),
    };
    for subject in &corpus.subjects {
        let file = format!("{}.jsonl", subject.meta.subject_id);
        let path = root.join(&file);
        let mut out = Vec::new();
        for rec in &subject.sentences {
            serde_json::to_writer(&mut out, rec)?;
            out.push(b'\n');
            if let Some(eeg) = &rec.continuous_eeg {
                write_f32_le(&root.join(&eeg.file), &eeg.data)?;
            }
        }
        fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
        manifest.subjects.push(ManifestSubject {
            meta: subject.meta.clone(),
            file,
        });
    }
    let path = root.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))
}

/// Relative path used for a sentence's continuous EEG payload.
pub fn eeg_payload_path(subject_id: &str, sentence_id: &str) -> String {
    format!("{subject_id}_eeg/{sentence_id}.bin")
}

fn read_f32_le(path: &Path) -> Result<Vec<f32>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() % 4 != 0 {
        return Err(Error::validation(
            "EEG payload is a whole number of f32 values",
            format!("{}: {} bytes", path.display(), bytes.len()),
        ));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

fn write_f32_le(path: &Path, data: &[f32]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf = Vec::with_capacity(data.len() * 4);
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    f.write_all(&buf).map_err(|e| Error::io(path, e))
}
