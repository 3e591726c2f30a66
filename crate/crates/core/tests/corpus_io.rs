use std::fs;
use std::path::{Path, PathBuf};

use readtask::corpus::*;
use readtask::Error;

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/minimal")
}

/// Copies the fixture into a temp dir, applying `edit` to the JSONL text.
fn edited_fixture(edit: impl Fn(&str) -> String) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixture().join("manifest.json"), dir.path().join("manifest.json")).unwrap();
    let text = fs::read_to_string(fixture().join("ZAB.jsonl")).unwrap();
    fs::write(dir.path().join("ZAB.jsonl"), edit(&text)).unwrap();
    dir
}

fn validation_rule(err: Error) -> &'static str {
    match err {
        Error::Validation { rule, .. } => rule,
        other => panic!("expected validation error, got {other}"),
    }
}

#[test]
fn loads_minimal_fixture() {
    let c = load_corpus(fixture()).unwrap();
    assert_eq!(c.dataset_id, "fixture");
    assert_eq!(c.subjects.len(), 1);
    let s = &c.subjects[0];
    assert_eq!(s.meta.subject_id, "ZAB");
    assert_eq!(s.sentences.len(), 2);
    assert_eq!(s.sentences[0].task_label, TaskLabel::NR);
    assert_eq!(s.sentences[0].fixated_word_count(), 2);
    assert_eq!(s.sentences[1].tokens(), vec!["She", "founded"]);
}

#[test]
fn short_band_vector_is_rejected() {
    let dir = edited_fixture(|t| {
        let mut lines: Vec<String> = t.lines().map(String::from).collect();
        let mut v: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
        v["band_power"]["gamma"].as_array_mut().unwrap().pop();
        lines[0] = v.to_string();
        lines.join("\n") + "\n"
    });
    let err = load_corpus(dir.path()).unwrap_err();
    assert_eq!(validation_rule(err), "band vector length ≠ 105");
}

#[test]
fn duplicate_sentence_id_is_rejected() {
    let dir = edited_fixture(|t| t.replace("TSR_0001", "NR_0001"));
    let err = load_corpus(dir.path()).unwrap_err();
    assert_eq!(validation_rule(err), "sentence_id unique within subject");
}

#[test]
fn out_of_range_word_index_is_rejected() {
    let dir = edited_fixture(|t| t.replacen("\"word_index\": 2", "\"word_index\": 3", 1));
    let err = load_corpus(dir.path()).unwrap_err();
    assert_eq!(validation_rule(err), "word_index < word count");
}

#[test]
fn malformed_line_reports_file_and_line() {
    let dir = edited_fixture(|t| {
        let first = t.lines().next().unwrap();
        format!("{first}\n{{\"sentence_id\": \n")
    });
    match load_corpus(dir.path()).unwrap_err() {
        Error::Parse { file, line, .. } => {
            assert!(file.ends_with("ZAB.jsonl"));
            assert_eq!(line, 2);
        }
        other => panic!("expected parse error, got {other}"),
    }
}

#[test]
fn missing_manifest_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(load_corpus(dir.path()).unwrap_err().kind(), "io");
}

fn dir_bytes(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn save_load_save_is_byte_identical() {
    let mut spec = SynthSpec {
        n_subjects: 2,
        sentences_per_class: 3,
        sr_sentences: 2,
        ..SynthSpec::default()
    };
    spec.eeg.level = EegLevel::Fixation;
    spec.eeg.continuous = Some(ContinuousSynth {
        sample_rate_hz: 250.0,
        noise_std: 0.2,
    });
    let corpus = synthesize_corpus(&spec, 21).unwrap();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    save_corpus(&corpus, a.path()).unwrap();
    let loaded = load_corpus(a.path()).unwrap();
    assert_eq!(loaded, corpus);
    save_corpus(&loaded, b.path()).unwrap();
    let (da, db) = (dir_bytes(a.path()), dir_bytes(b.path()));
    assert!(da.iter().any(|(p, _)| p.extension().is_some_and(|e| e == "bin")));
    assert_eq!(da, db);
}

#[test]
fn fixture_round_trips_through_save() {
    let c = load_corpus(fixture()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_corpus(&c, dir.path()).unwrap();
    assert_eq!(load_corpus(dir.path()).unwrap(), c);
}
