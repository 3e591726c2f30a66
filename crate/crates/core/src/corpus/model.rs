use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::dsp::Band;
use crate::error::{Error, Result};

/// Number of EEG channels retained after preprocessing.
pub const N_CHANNELS: usize = 105;

/// Per-band 105-channel amplitude vectors.
pub type BandPowerMap = BTreeMap<Band, Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TaskLabel {
    /// Normal reading.
    NR,
    /// Task-specific (relation search) reading.
    TSR,
    /// Sentiment reading; only used by session classification.
    SR,
}

impl TaskLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskLabel::NR => "NR",
            TaskLabel::TSR => "TSR",
            TaskLabel::SR => "SR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixationEvent {
    /// Milliseconds from sentence onset.
    pub onset_ms: f64,
    pub duration_ms: f64,
    pub word_index: usize,
    /// Chronological rank within the sentence.
    pub fixation_order: usize,
    /// Band power over this fixation, when released at fixation level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_power: Option<BandPowerMap>,
}

impl FixationEvent {
    pub fn end_ms(&self) -> f64 {
        self.onset_ms + self.duration_ms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaccadeEvent {
    pub duration_ms: f64,
    pub amplitude_deg: f64,
    /// Peak velocity.
    pub velocity_degps: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_word: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub to_word: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordRecord {
    pub token: String,
    /// Word-level band power aggregated over the word's fixations.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_power: Option<BandPowerMap>,
}

/// Continuous EEG for one sentence, channel-major, sample 0 at sentence onset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousEeg {
    pub n_channels: usize,
    pub n_samples: usize,
    pub sample_rate_hz: f64,
    /// Path of the little-endian f32 payload, relative to the corpus root.
    pub file: String,
    #[serde(skip)]
    pub data: Vec<f32>,
}

impl ContinuousEeg {
    pub fn channel(&self, c: usize) -> &[f32] {
        &self.data[c * self.n_samples..(c + 1) * self.n_samples]
    }

    pub fn duration_ms(&self) -> f64 {
        self.n_samples as f64 * 1000.0 / self.sample_rate_hz
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceRecording {
    pub sentence_id: String,
    pub task_label: TaskLabel,
    pub session_id: u32,
    pub block_id: u32,
    pub total_reading_ms: f64,
    pub words: Vec<WordRecord>,
    /// Chronologically ordered fixations.
    pub fixations: Vec<FixationEvent>,
    pub saccades: Vec<SaccadeEvent>,
    /// Whole-sentence band power.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_power: Option<BandPowerMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub continuous_eeg: Option<ContinuousEeg>,
}

impl SentenceRecording {
    /// Fixations landing on word `w`, in chronological order.
    pub fn fixations_on(&self, w: usize) -> impl Iterator<Item = &FixationEvent> + '_ {
        self.fixations.iter().filter(move |f| f.word_index == w)
    }

    pub fn tokens(&self) -> Vec<&str> {
        self.words.iter().map(|w| w.token.as_str()).collect()
    }

    pub fn fixated_word_count(&self) -> usize {
        self.fixations
            .iter()
            .map(|f| f.word_index)
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn validate(&self) -> Result<()> {
        let id = &self.sentence_id;
        if self.words.is_empty() {
            return Err(Error::validation("words nonempty", format!("sentence {id} has no words")));
        }
        if !(self.total_reading_ms > 0.0 && self.total_reading_ms.is_finite()) {
            return Err(Error::validation(
                "total_reading_ms > 0",
                format!("sentence {id}: total_reading_ms = {}", self.total_reading_ms),
            ));
        }
        let n_words = self.words.len();
        let n_fix = self.fixations.len();
        let mut seen = vec![false; n_fix];
        for f in &self.fixations {
            if !(f.duration_ms > 0.0 && f.duration_ms.is_finite()) {
                return Err(Error::validation(
                    "fixation duration_ms > 0",
                    format!("sentence {id}: duration {}", f.duration_ms),
                ));
            }
            if !f.onset_ms.is_finite() || f.onset_ms < 0.0 {
                return Err(Error::validation(
                    "fixation onset_ms >= 0",
                    format!("sentence {id}: onset {}", f.onset_ms),
                ));
            }
            if f.word_index >= n_words {
                return Err(Error::validation(
                    "word_index < word count",
                    format!("sentence {id}: word_index {} with {n_words} words", f.word_index),
                ));
            }
            if f.fixation_order >= n_fix || seen[f.fixation_order] {
                return Err(Error::validation(
                    "fixation_order is a permutation",
                    format!("sentence {id}: order {} repeated or out of range", f.fixation_order),
                ));
            }
            seen[f.fixation_order] = true;
            if let Some(bp) = &f.band_power {
                check_band_map(bp, id)?;
            }
        }
        let mut by_order: Vec<&FixationEvent> = self.fixations.iter().collect();
        by_order.sort_by_key(|f| f.fixation_order);
        if by_order.windows(2).any(|w| w[1].onset_ms < w[0].onset_ms) {
            return Err(Error::validation(
                "fixation_order ordered by onset_ms",
                format!("sentence {id}: fixation order disagrees with onsets"),
            ));
        }
        for s in &self.saccades {
            if !(s.duration_ms > 0.0) || !(s.amplitude_deg >= 0.0) || !(s.velocity_degps >= 0.0) {
                return Err(Error::validation(
                    "saccade duration > 0, amplitude >= 0, velocity >= 0",
                    format!("sentence {id}: {s:?}"),
                ));
            }
            for w in [s.from_word, s.to_word].into_iter().flatten() {
                if w >= n_words {
                    return Err(Error::validation(
                        "saccade word index < word count",
                        format!("sentence {id}: saccade word {w}"),
                    ));
                }
            }
        }
        for w in &self.words {
            if let Some(bp) = &w.band_power {
                check_band_map(bp, id)?;
            }
        }
        if let Some(bp) = &self.band_power {
            check_band_map(bp, id)?;
        }
        if let Some(eeg) = &self.continuous_eeg {
            if !(eeg.sample_rate_hz > 0.0) {
                return Err(Error::validation(
                    "sample_rate_hz > 0",
                    format!("sentence {id}: {}", eeg.sample_rate_hz),
                ));
            }
            if eeg.n_channels != N_CHANNELS {
                return Err(Error::validation(
                    "continuous EEG has 105 channels",
                    format!("sentence {id}: {} channels", eeg.n_channels),
                ));
            }
            if eeg.data.len() != eeg.n_channels * eeg.n_samples {
                return Err(Error::validation(
                    "continuous EEG payload matches declared dimensions",
                    format!(
                        "sentence {id}: {} values for {}x{}",
                        eeg.data.len(),
                        eeg.n_channels,
                        eeg.n_samples
                    ),
                ));
            }
            let limit = eeg.duration_ms() + 0.5 * 1000.0 / eeg.sample_rate_hz;
            if let Some(f) = self.fixations.iter().find(|f| f.end_ms() > limit) {
                return Err(Error::validation(
                    "fixations fit within continuous EEG",
                    format!(
                        "sentence {id}: fixation ends at {} ms, EEG covers {} ms",
                        f.end_ms(),
                        eeg.duration_ms()
                    ),
                ));
            }
        }
        Ok(())
    }
}

fn check_band_map(map: &BandPowerMap, id: &str) -> Result<()> {
    for (band, v) in map {
        if v.len() != N_CHANNELS {
            return Err(Error::validation(
                "band vector length ≠ 105",
                format!("sentence {id}: {} vector has {} entries", band.name(), v.len()),
            ));
        }
        if v.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::validation(
                "band power values finite and non-negative",
                format!("sentence {id}: {} vector", band.name()),
            ));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectMeta {
    pub subject_id: String,
    /// LexTALE score, percent.
    pub lextale: f64,
    /// Comprehension score in normal reading, percent.
    pub score_nr: f64,
    pub score_tsr: f64,
    /// Seconds per sentence in normal reading.
    pub speed_nr: f64,
    pub speed_tsr: f64,
}

impl SubjectMeta {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lextale", self.lextale),
            ("score_nr", self.score_nr),
            ("score_tsr", self.score_tsr),
        ] {
            if !(0.0..=100.0).contains(&v) {
                return Err(Error::validation(
                    "percent in [0,100]",
                    format!("subject {}: {name} = {v}", self.subject_id),
                ));
            }
        }
        for (name, v) in [("speed_nr", self.speed_nr), ("speed_tsr", self.speed_tsr)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(
                    "speed > 0",
                    format!("subject {}: {name} = {v}", self.subject_id),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectData {
    pub meta: SubjectMeta,
    pub sentences: Vec<SentenceRecording>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub dataset_id: String,
    pub subjects: Vec<SubjectData>,
}

impl Corpus {
    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for s in &self.subjects {
            s.meta.validate()?;
            if !ids.insert(s.meta.subject_id.as_str()) {
                return Err(Error::validation(
                    "subject_ids unique",
                    format!("duplicate subject {}", s.meta.subject_id),
                ));
            }
            let mut sent_ids = HashSet::new();
            for r in &s.sentences {
                if !sent_ids.insert(r.sentence_id.as_str()) {
                    return Err(Error::validation(
                        "sentence_id unique within subject",
                        format!("subject {}: duplicate sentence {}", s.meta.subject_id, r.sentence_id),
                    ));
                }
                r.validate()?;
            }
        }
        Ok(())
    }

    pub fn subject(&self, id: &str) -> Option<&SubjectData> {
        self.subjects.iter().find(|s| s.meta.subject_id == id)
    }

    pub fn subject_ids(&self) -> Vec<&str> {
        self.subjects.iter().map(|s| s.meta.subject_id.as_str()).collect()
    }

    /// Drops the listed subjects (the exclusion list is configuration, not an algorithm).
    pub fn without_subjects(&self, excluded: &[String]) -> Corpus {
        Corpus {
            dataset_id: self.dataset_id.clone(),
            subjects: self
                .subjects
                .iter()
                .filter(|s| !excluded.contains(&s.meta.subject_id))
                .cloned()
                .collect(),
        }
    }

    pub fn n_sentences(&self) -> usize {
        self.subjects.iter().map(|s| s.sentences.len()).sum()
    }
}
