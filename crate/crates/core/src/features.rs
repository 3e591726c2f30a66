//! Named feature sets: corpus → [`FeatureMatrix`] or [`SequenceDataset`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, SentenceRecording, TaskLabel};
use crate::dsp::Band;
use crate::eeg::{ablated_word_eeg, sentence_eeg_feature_names, sentence_eeg_features, sentence_eeg_set_names, word_eeg_features, EegConfig};
use crate::error::{Error, Result};
use crate::gaze::{self, sentence_gaze_features, word_gaze_features, SENT_GAZE_NAMES, SENT_SACCADE_NAMES};
use crate::learners::{FeatureMatrix, SampleGroup, SequenceDataset};
use crate::text::{flesch_score, EmbeddingTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    /// One vector per sentence (linear SVM).
    Sentence,
    /// One vector per word (BiLSTM).
    Word,
}

const WORD_SETS: [&str; 8] = [
    "eye_tracking",
    "eye_tracking_sacc",
    "eeg_theta",
    "eeg_alpha",
    "eeg_beta",
    "eeg_gamma",
    "eeg_raw",
    "word_embedding",
];

pub fn sentence_set_names() -> Vec<String> {
    let mut v: Vec<String> = SENT_GAZE_NAMES.iter().chain(&SENT_SACCADE_NAMES).map(|s| s.to_string()).collect();
    v.extend(["sent_gaze", "sent_saccade", "sent_gaze_sacc"].map(String::from));
    v.extend(sentence_eeg_set_names());
    v.push("sent_gaze_eeg_means".into());
    v.push("fre".into());
    v
}

pub fn word_set_names() -> Vec<String> {
    WORD_SETS.iter().map(|s| s.to_string()).collect()
}

pub fn all_set_names() -> Vec<String> {
    let mut v = sentence_set_names();
    v.extend(word_set_names());
    v
}

fn unknown(name: &str) -> Error {
    Error::UnknownName {
        kind: "feature set",
        name: name.to_string(),
        valid: all_set_names(),
    }
}

pub fn level_of(set_name: &str) -> Result<Level> {
    if WORD_SETS.contains(&set_name) {
        Ok(Level::Word)
    } else if sentence_set_names().iter().any(|n| n == set_name) {
        Ok(Level::Sentence)
    } else {
        Err(unknown(set_name))
    }
}

/// Extraction options shared by all sets.
#[derive(Debug, Clone, Copy, Default)]
pub struct FeatureContext<'a> {
    pub eeg: EegConfig,
    pub embeddings: Option<&'a EmbeddingTable>,
}

/// Which sentences become samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFilter {
    /// NR and TSR only, labelled NR = 0, TSR = 1.
    Task,
    /// NR, TSR and SR, labelled by task in that order.
    AllTasks,
}

impl SampleFilter {
    fn tasks(self) -> &'static [TaskLabel] {
        match self {
            SampleFilter::Task => &[TaskLabel::NR, TaskLabel::TSR],
            SampleFilter::AllTasks => &[TaskLabel::NR, TaskLabel::TSR, TaskLabel::SR],
        }
    }
}

fn samples(corpus: &Corpus, filter: SampleFilter) -> Vec<(SampleGroup, &SentenceRecording)> {
    let tasks = filter.tasks();
    corpus
        .subjects
        .iter()
        .flat_map(|s| {
            s.sentences.iter().filter(|r| tasks.contains(&r.task_label)).map(|r| {
                (
                    SampleGroup {
                        subject_id: s.meta.subject_id.clone(),
                        session_id: r.session_id,
                        block_id: r.block_id,
                        sentence_id: r.sentence_id.clone(),
                        task: r.task_label,
                    },
                    r,
                )
            })
        })
        .collect()
}

fn task_label_ids(groups: &[SampleGroup], filter: SampleFilter) -> (Vec<usize>, Vec<String>) {
    let tasks = filter.tasks();
    let labels = groups
        .iter()
        .map(|g| tasks.iter().position(|t| *t == g.task).expect("filtered"))
        .collect();
    (labels, tasks.iter().map(|t| t.as_str().to_string()).collect())
}

fn gaze_names(set_name: &str) -> Option<Vec<String>> {
    let v: Vec<&str> = match set_name {
        "sent_gaze" => SENT_GAZE_NAMES.to_vec(),
        "sent_saccade" => SENT_SACCADE_NAMES.to_vec(),
        "sent_gaze_sacc" => SENT_GAZE_NAMES.iter().chain(&SENT_SACCADE_NAMES).copied().collect(),
        n if SENT_GAZE_NAMES.contains(&n) || SENT_SACCADE_NAMES.contains(&n) => vec![n],
        _ => return None,
    };
    Some(v.into_iter().map(String::from).collect())
}

/// Column names of a sentence-level set.
pub fn sentence_feature_names(set_name: &str, ctx: &FeatureContext) -> Result<Vec<String>> {
    if let Some(v) = gaze_names(set_name) {
        return Ok(v);
    }
    match set_name {
        "fre" => Ok(vec!["fre".into()]),
        "sent_gaze_eeg_means" => {
            let mut v = gaze_names("sent_gaze").expect("known");
            v.extend(sentence_eeg_feature_names("eeg_means", &ctx.eeg)?);
            Ok(v)
        }
        _ => sentence_eeg_feature_names(set_name, &ctx.eeg).map_err(|_| unknown(set_name)),
    }
}

/// Sentence-level feature vector.
pub fn sentence_features(s: &SentenceRecording, set_name: &str, ctx: &FeatureContext) -> Result<Vec<f64>> {
    if let Some(names) = gaze_names(set_name) {
        let g = sentence_gaze_features(s)?;
        return Ok(names.iter().map(|n| g.get(n).expect("known name")).collect());
    }
    match set_name {
        "fre" => Ok(vec![flesch_score(&s.tokens())?]),
        "sent_gaze_eeg_means" => {
            let mut v = sentence_gaze_features(s)?.gaze().to_vec();
            v.extend(sentence_eeg_features(s, "eeg_means", &ctx.eeg)?);
            Ok(v)
        }
        _ => {
            if !sentence_eeg_set_names().iter().any(|n| n == set_name) {
                return Err(unknown(set_name));
            }
            sentence_eeg_features(s, set_name, &ctx.eeg)
        }
    }
}

fn word_band(set_name: &str) -> Option<Band> {
    match set_name {
        "eeg_theta" => Some(Band::Theta),
        "eeg_alpha" => Some(Band::Alpha),
        "eeg_beta" => Some(Band::Beta),
        "eeg_gamma" => Some(Band::Gamma),
        "eeg_raw" => Some(Band::Broadband),
        _ => None,
    }
}

/// Column names of a word-level set.
pub fn word_feature_names(set_name: &str, ctx: &FeatureContext) -> Result<Vec<String>> {
    match set_name {
        "eye_tracking" => Ok(gaze::word_feature_names(false).into_iter().map(String::from).collect()),
        "eye_tracking_sacc" => Ok(gaze::word_feature_names(true).into_iter().map(String::from).collect()),
        "word_embedding" => {
            let t = ctx.embeddings.ok_or_else(|| Error::Data("word_embedding needs an embedding table".into()))?;
            Ok((0..t.dim()).map(|j| format!("emb{j}")).collect())
        }
        _ => match word_band(set_name) {
            Some(b) => Ok((0..crate::corpus::N_CHANNELS).map(|c| format!("{b}_e{c}")).collect()),
            None => Err(unknown(set_name)),
        },
    }
}

/// Per-word vectors of a word-level set.
pub fn word_features(s: &SentenceRecording, set_name: &str, ctx: &FeatureContext) -> Result<Vec<Vec<f64>>> {
    match set_name {
        "eye_tracking" | "eye_tracking_sacc" => {
            let sacc = set_name == "eye_tracking_sacc";
            Ok(word_gaze_features(s).iter().map(|f| f.to_vec(sacc)).collect())
        }
        "word_embedding" => {
            let t = ctx.embeddings.ok_or_else(|| Error::Data("word_embedding needs an embedding table".into()))?;
            Ok(t.embed(&s.tokens()))
        }
        _ => match word_band(set_name) {
            Some(b) => word_eeg_features(s, b, &ctx.eeg),
            None => Err(unknown(set_name)),
        },
    }
}

/// Sentence-level matrix for `set_name` with task labels.
pub fn assemble_feature_set(corpus: &Corpus, set_name: &str, ctx: &FeatureContext) -> Result<FeatureMatrix> {
    assemble_feature_set_with(corpus, set_name, ctx, SampleFilter::Task)
}

pub fn assemble_feature_set_with(
    corpus: &Corpus,
    set_name: &str,
    ctx: &FeatureContext,
    filter: SampleFilter,
) -> Result<FeatureMatrix> {
    match level_of(set_name)? {
        Level::Sentence => {}
        Level::Word => {
            return Err(Error::Parameter(format!(
                "{set_name} is a word-level set; use assemble_sequences"
            )))
        }
    }
    let feature_names = sentence_feature_names(set_name, ctx)?;
    let samples = samples(corpus, filter);
    let rows = samples
        .par_iter()
        .map(|(_, s)| sentence_features(s, set_name, ctx))
        .collect::<Result<Vec<_>>>()?;
    let groups: Vec<SampleGroup> = samples.into_iter().map(|(g, _)| g).collect();
    let (labels, label_names) = task_label_ids(&groups, filter);
    let m = FeatureMatrix {
        set_name: set_name.to_string(),
        feature_names,
        rows,
        labels,
        label_names,
        groups,
    };
    m.validate()?;
    Ok(m)
}

/// Word-level sequences for `set_name` with task labels.
pub fn assemble_sequences(corpus: &Corpus, set_name: &str, ctx: &FeatureContext) -> Result<SequenceDataset> {
    if level_of(set_name)? != Level::Word {
        return Err(Error::Parameter(format!("{set_name} is a sentence-level set; use assemble_feature_set")));
    }
    let feature_names = word_feature_names(set_name, ctx)?;
    let samples = samples(corpus, SampleFilter::Task);
    let sequences = samples
        .par_iter()
        .map(|(_, s)| word_features(s, set_name, ctx))
        .collect::<Result<Vec<_>>>()?;
    let groups: Vec<SampleGroup> = samples.into_iter().map(|(g, _)| g).collect();
    let (labels, label_names) = task_label_ids(&groups, SampleFilter::Task);
    let ds = SequenceDataset {
        set_name: set_name.to_string(),
        feature_names,
        sequences,
        labels,
        label_names,
        groups,
    };
    ds.validate()?;
    Ok(ds)
}

/// Sentence-level matrix of fixation-ablated EEG (see [`ablated_word_eeg`]).
/// Sentences without fixations are dropped.
pub fn assemble_ablated(corpus: &Corpus, band: Band, fraction: f64, ctx: &FeatureContext) -> Result<FeatureMatrix> {
    let samples: Vec<_> = samples(corpus, SampleFilter::Task)
        .into_iter()
        .filter(|(_, s)| !s.fixations.is_empty())
        .collect();
    let rows = samples
        .par_iter()
        .map(|(_, s)| ablated_word_eeg(s, band, fraction, &ctx.eeg))
        .collect::<Result<Vec<_>>>()?;
    let groups: Vec<SampleGroup> = samples.into_iter().map(|(g, _)| g).collect();
    let (labels, label_names) = task_label_ids(&groups, SampleFilter::Task);
    let m = FeatureMatrix {
        set_name: format!("ablated_{band}_{fraction}"),
        feature_names: (0..crate::corpus::N_CHANNELS).map(|c| format!("{band}_e{c}")).collect(),
        rows,
        labels,
        label_names,
        groups,
    };
    m.validate()?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synthesize_corpus, EegLevel, SynthSpec};

    fn corpus(level: EegLevel) -> Corpus {
        let mut spec = SynthSpec {
            n_subjects: 2,
            sentences_per_class: 6,
            sr_sentences: 2,
            ..SynthSpec::default()
        };
        spec.eeg.level = level;
        synthesize_corpus(&spec, 4).unwrap()
    }

    #[test]
    fn declared_dimensions() {
        let c = corpus(EegLevel::Sentence);
        let ctx = FeatureContext::default();
        for (name, d) in [
            ("sent_gaze", 3),
            ("sent_saccade", 6),
            ("sent_gaze_sacc", 9),
            ("omission_rate", 1),
            ("max_sacc_dur", 1),
            ("fre", 1),
            ("eeg_means", 4),
            ("sent_gaze_eeg_means", 7),
            ("electrode_features_gamma", 105),
            ("electrode_features_all", 420),
        ] {
            let m = assemble_feature_set(&c, name, &ctx).unwrap();
            assert_eq!(m.dim(), d, "{name}");
            assert_eq!(m.n_rows(), 24);
            assert_eq!(m.label_names, vec!["NR", "TSR"]);
        }
    }

    #[test]
    fn every_sentence_set_assembles() {
        let c = corpus(EegLevel::Sentence);
        let ctx = FeatureContext::default();
        for name in sentence_set_names() {
            let m = assemble_feature_set(&c, &name, &ctx).unwrap();
            assert_eq!(m.feature_names.len(), m.rows[0].len(), "{name}");
        }
    }

    #[test]
    fn word_sets_have_declared_dimensions() {
        let c = corpus(EegLevel::Word);
        let table = EmbeddingTable::parse("the\t1 2 3\n", "mem").unwrap();
        let ctx = FeatureContext {
            embeddings: Some(&table),
            ..Default::default()
        };
        for (name, d) in [("eye_tracking", 5), ("eye_tracking_sacc", 17), ("eeg_gamma", 105), ("eeg_raw", 105), ("word_embedding", 3)] {
            let ds = assemble_sequences(&c, name, &ctx).unwrap();
            assert_eq!(ds.dim(), d);
            assert_eq!(ds.len(), 24);
            for (seq, g) in ds.sequences.iter().zip(&ds.groups) {
                let s = c.subject(&g.subject_id).unwrap().sentences.iter().find(|s| s.sentence_id == g.sentence_id).unwrap();
                assert_eq!(seq.len(), s.words.len());
            }
        }
    }

    #[test]
    fn sample_filter_controls_sr() {
        let c = corpus(EegLevel::Sentence);
        let ctx = FeatureContext::default();
        let m = assemble_feature_set_with(&c, "sent_gaze", &ctx, SampleFilter::AllTasks).unwrap();
        assert_eq!(m.n_rows(), 28);
        assert_eq!(m.label_names, vec!["NR", "TSR", "SR"]);
        assert!(m.labels.contains(&2));
    }

    #[test]
    fn unknown_and_mismatched_names() {
        let c = corpus(EegLevel::Sentence);
        let ctx = FeatureContext::default();
        match assemble_feature_set(&c, "sent_gaze_x", &ctx).unwrap_err() {
            Error::UnknownName { valid, .. } => assert!(valid.contains(&"sent_gaze_sacc".to_string())),
            e => panic!("{e}"),
        }
        assert_eq!(assemble_feature_set(&c, "eye_tracking", &ctx).unwrap_err().kind(), "parameter");
        assert_eq!(assemble_sequences(&c, "sent_gaze", &ctx).unwrap_err().kind(), "parameter");
        assert_eq!(assemble_sequences(&c, "eeg_gamma", &ctx).unwrap_err().kind(), "data");
        assert_eq!(assemble_sequences(&c, "word_embedding", &ctx).unwrap_err().kind(), "data");
    }

    #[test]
    fn ablated_matrix_at_full_fraction_is_the_unweighted_fixation_mean() {
        let c = corpus(EegLevel::Fixation);
        let ctx = FeatureContext::default();
        let m = assemble_ablated(&c, Band::Gamma, 1.0, &ctx).unwrap();
        let s = &c.subjects[0].sentences[0];
        let n = s.fixations.len() as f64;
        let want: Vec<f64> = (0..105)
            .map(|ch| s.fixations.iter().map(|f| f.band_power.as_ref().unwrap()[&Band::Gamma][ch]).sum::<f64>() / n)
            .collect();
        for (a, b) in m.rows[0].iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
