//! Synthetic corpora with known class-conditional distributions.
//!
//! Sentence-level quantities (omission rate, reading time) are drawn from
//! per-class Gaussians; fixation and saccade streams are then built to be
//! consistent with the draws (skipped words get no fixation). EEG band power
//! is generated directly as 105-channel Gaussian vectors whose mean shifts
//! with the task on a subset of channels, with optional subject, block and
//! session effects. Optionally a continuous signal (one tone per band with
//! the same amplitudes, plus noise) is emitted so the DSP path can be
//! exercised end to end.

use std::collections::BTreeMap;
#[cfg(test)]
use std::collections::BTreeSet;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::io::eeg_payload_path;
use super::model::*;
use crate::dsp::Band;
use crate::error::{Error, Result};
use crate::seed::rng_for;
use crate::seed_path;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: f64,
    pub std: f64,
}

impl Gaussian {
    pub const fn new(mean: f64, std: f64) -> Self {
        Gaussian { mean, std }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        // Validated up front: std > 0 and finite.
        Normal::new(self.mean, self.std).expect("validated gaussian").sample(rng)
    }

    fn check(&self, what: &str) -> Result<()> {
        if !(self.std > 0.0 && self.std.is_finite() && self.mean.is_finite()) {
            return Err(Error::Parameter(format!(
                "{what}: std must be positive and finite, got N({}, {}²)",
                self.mean, self.std
            )));
        }
        Ok(())
    }
}

/// Per-class reading behaviour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassParams {
    /// Fraction of words in a sentence that receive no fixation.
    pub omission_rate: Gaussian,
    /// Sentence reading time, seconds.
    pub reading_time_s: Gaussian,
    pub refixation_prob: f64,
    pub regression_prob: f64,
    pub saccade_duration_ms: Gaussian,
    pub saccade_velocity_degps: Gaussian,
}

impl ClassParams {
    pub fn normal_reading() -> Self {
        ClassParams {
            omission_rate: Gaussian::new(0.32, 0.09),
            reading_time_s: Gaussian::new(7.3, 2.5),
            refixation_prob: 0.2,
            regression_prob: 0.1,
            saccade_duration_ms: Gaussian::new(25.0, 6.0),
            saccade_velocity_degps: Gaussian::new(250.0, 40.0),
        }
    }

    pub fn task_specific_reading() -> Self {
        ClassParams {
            omission_rate: Gaussian::new(0.47, 0.11),
            reading_time_s: Gaussian::new(4.2, 1.5),
            refixation_prob: 0.15,
            regression_prob: 0.08,
            saccade_duration_ms: Gaussian::new(25.0, 6.0),
            saccade_velocity_degps: Gaussian::new(250.0, 40.0),
        }
    }

    fn check(&self, class: &str) -> Result<()> {
        self.omission_rate.check(&format!("{class}.omission_rate"))?;
        self.reading_time_s.check(&format!("{class}.reading_time_s"))?;
        self.saccade_duration_ms.check(&format!("{class}.saccade_duration_ms"))?;
        self.saccade_velocity_degps.check(&format!("{class}.saccade_velocity_degps"))?;
        for (name, p) in [("refixation_prob", self.refixation_prob), ("regression_prob", self.regression_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Parameter(format!("{class}.{name} must lie in [0,1], got {p}")));
            }
        }
        Ok(())
    }
}

/// Which band-power vectors are written into the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EegLevel {
    None,
    /// Whole-sentence vectors only.
    Sentence,
    /// Sentence and word vectors.
    Word,
    /// Sentence, word and per-fixation vectors.
    Fixation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuousSynth {
    pub sample_rate_hz: f64,
    /// Std of additive white noise, µV.
    pub noise_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EegSynth {
    pub level: EegLevel,
    /// Baseline amplitude per band, µV.
    pub base_amplitude: BTreeMap<Band, f64>,
    /// TSR minus NR mean on the informative channels, per band.
    pub tsr_shift: BTreeMap<Band, f64>,
    /// Channels carrying the task (and block) effect.
    pub informative_channels: Vec<usize>,
    /// Per-fixation (and per-word) channel noise.
    pub noise_std: f64,
    /// Noise on whole-sentence vectors.
    pub sentence_noise_std: f64,
    /// Std of a fixed per-subject offset on every channel.
    pub subject_offset_std: f64,
    /// Std of a random per-block offset on the informative channels.
    pub block_effect_std: f64,
    /// Linear per-block drift on the informative channels.
    pub block_drift: f64,
    /// Offset added to every channel in session 2.
    pub session_shift: f64,
    pub continuous: Option<ContinuousSynth>,
}

impl Default for EegSynth {
    fn default() -> Self {
        let base = [
            (Band::Theta, 2.8),
            (Band::Alpha, 2.6),
            (Band::Beta, 2.7),
            (Band::Gamma, 1.8),
            (Band::Broadband, 6.0),
        ];
        // Lower bands stronger in normal reading, gamma stronger in task-specific reading.
        let shift = [
            (Band::Theta, -0.3),
            (Band::Alpha, -0.3),
            (Band::Beta, -0.1),
            (Band::Gamma, 0.3),
            (Band::Broadband, -0.2),
        ];
        EegSynth {
            level: EegLevel::Sentence,
            base_amplitude: base.into_iter().collect(),
            tsr_shift: shift.into_iter().collect(),
            informative_channels: (0..20).collect(),
            noise_std: 0.5,
            sentence_noise_std: 0.2,
            subject_offset_std: 0.3,
            block_effect_std: 0.0,
            block_drift: 0.0,
            session_shift: 0.0,
            continuous: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordingLayout {
    /// All NR blocks in session 1, all TSR blocks in session 2.
    SeparateSessions,
    /// One session with NR and TSR blocks alternating (NR odd, TSR even).
    AlternatingBlocks,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub dataset_id: String,
    pub n_subjects: usize,
    pub sentences_per_class: usize,
    /// Words per sentence.
    pub sentence_length: Gaussian,
    pub nr: ClassParams,
    pub tsr: ClassParams,
    pub layout: RecordingLayout,
    pub blocks_per_task: usize,
    /// SR sentences per subject, split evenly over two sessions.
    pub sr_sentences: usize,
    pub eeg: EegSynth,
}

impl Default for SynthSpec {
    /// Parameters modelled on the first corpus: separate sessions per task.
    fn default() -> Self {
        SynthSpec {
            dataset_id: "synthetic-separate-sessions".into(),
            n_subjects: 12,
            sentences_per_class: 60,
            sentence_length: Gaussian::new(21.0, 10.5),
            nr: ClassParams::normal_reading(),
            tsr: ClassParams::task_specific_reading(),
            layout: RecordingLayout::SeparateSessions,
            blocks_per_task: 1,
            sr_sentences: 0,
            eeg: EegSynth::default(),
        }
    }
}

impl SynthSpec {
    /// Parameters modelled on the second corpus: one session, 7 alternating
    /// blocks per task.
    pub fn alternating_blocks() -> Self {
        let mut nr = ClassParams::normal_reading();
        nr.omission_rate = Gaussian::new(0.33, 0.09);
        nr.reading_time_s = Gaussian::new(5.8, 1.4);
        let mut tsr = ClassParams::task_specific_reading();
        tsr.omission_rate = Gaussian::new(0.45, 0.14);
        tsr.reading_time_s = Gaussian::new(4.8, 2.0);
        SynthSpec {
            dataset_id: "synthetic-alternating-blocks".into(),
            n_subjects: 16,
            sentences_per_class: 70,
            sentence_length: Gaussian::new(20.5, 9.2),
            nr,
            tsr,
            layout: RecordingLayout::AlternatingBlocks,
            blocks_per_task: 7,
            sr_sentences: 0,
            eeg: EegSynth::default(),
        }
    }

    /// Both classes share the NR parameters and the EEG carries no task shift.
    pub fn without_class_separation(mut self) -> Self {
        self.tsr = self.nr.clone();
        for v in self.eeg.tsr_shift.values_mut() {
            *v = 0.0;
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subjects == 0 || self.sentences_per_class == 0 || self.blocks_per_task == 0 {
            return Err(Error::Parameter(
                "n_subjects, sentences_per_class and blocks_per_task must be positive".into(),
            ));
        }
        if self.sentences_per_class < self.blocks_per_task {
            return Err(Error::Parameter(format!(
                "{} sentences per class cannot fill {} blocks",
                self.sentences_per_class, self.blocks_per_task
            )));
        }
        self.sentence_length.check("sentence_length")?;
        self.nr.check("nr")?;
        self.tsr.check("tsr")?;
        let e = &self.eeg;
        for (name, v) in [("noise_std", e.noise_std), ("sentence_noise_std", e.sentence_noise_std)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("eeg.{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("subject_offset_std", e.subject_offset_std),
            ("block_effect_std", e.block_effect_std),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Parameter(format!("eeg.{name} must be non-negative, got {v}")));
            }
        }
        if let Some(c) = e.informative_channels.iter().find(|&&c| c >= N_CHANNELS) {
            return Err(Error::Parameter(format!("informative channel {c} >= {N_CHANNELS}")));
        }
        for band in Band::ALL {
            if !e.base_amplitude.contains_key(&band) {
                return Err(Error::Parameter(format!("eeg.base_amplitude lacks {band}")));
            }
        }
        if let Some(c) = &e.continuous {
            if !(c.sample_rate_hz > 2.0 * Band::Broadband.range().high_hz) || !(c.noise_std >= 0.0) {
                return Err(Error::Parameter(format!(
                    "continuous EEG needs sample_rate_hz > 100 and noise_std >= 0, got {c:?}"
                )));
            }
        }
        Ok(())
    }
}

const VOCABULARY: &[&str] = &[
    "the", "of", "and", "in", "was", "he", "she", "his", "her", "for", "a", "to", "with", "by", "at",
    "from", "born", "became", "worked", "studied", "married", "university", "company", "president",
    "founded", "american", "british", "political", "party", "member", "award", "received", "career",
    "education", "director", "film", "national", "college", "government", "international",
    "professor", "minister", "politician", "writer", "actor", "elected", "served", "later",
    "after", "during", "known", "several", "early", "family", "history", "television",
    "organization", "independent", "representative", "particularly",
];

struct SubjectEffects {
    /// Per band, per channel.
    offset: BTreeMap<Band, Vec<f64>>,
    /// Per block id (1-based index), per channel.
    block: BTreeMap<u32, Vec<f64>>,
}

/// Generates a corpus; a pure function of `(spec, seed)`.
pub fn synthesize_corpus(spec: &SynthSpec, seed: u64) -> Result<Corpus> {
    spec.validate()?;
    let mut subjects = Vec::with_capacity(spec.n_subjects);
    for s in 0..spec.n_subjects {
        let subject_id = format!("S{:02}", s + 1);
        let mut rng = rng_for(seed, seed_path!["subject", s]);
        subjects.push(synth_subject(spec, &subject_id, &mut rng));
    }
    let corpus = Corpus {
        dataset_id: spec.dataset_id.clone(),
        subjects,
    };
    corpus.validate()?;
    Ok(corpus)
}

fn synth_subject(spec: &SynthSpec, subject_id: &str, rng: &mut ChaCha8Rng) -> SubjectData {
    let b = spec.blocks_per_task as u32;
    let e = &spec.eeg;
    let unit = Normal::new(0.0, 1.0).expect("unit normal");

    let offset = Band::ALL
        .into_iter()
        .map(|band| {
            let v = (0..N_CHANNELS).map(|_| e.subject_offset_std * unit.sample(rng)).collect();
            (band, v)
        })
        .collect();
    let mut block = BTreeMap::new();
    for id in 1..=2 * b + 2 {
        let mut v = vec![0.0; N_CHANNELS];
        for &c in &e.informative_channels {
            v[c] = e.block_effect_std * unit.sample(rng) + e.block_drift * f64::from(id - 1);
        }
        block.insert(id, v);
    }
    let effects = SubjectEffects { offset, block };

    let mut sentences = Vec::new();
    let n = spec.sentences_per_class;
    for (task, params) in [(TaskLabel::NR, &spec.nr), (TaskLabel::TSR, &spec.tsr)] {
        for i in 0..n {
            let j = (i * spec.blocks_per_task / n) as u32;
            let (session_id, block_id) = match (spec.layout, task) {
                (RecordingLayout::SeparateSessions, TaskLabel::NR) => (1, j + 1),
                (RecordingLayout::SeparateSessions, _) => (2, b + j + 1),
                (RecordingLayout::AlternatingBlocks, TaskLabel::NR) => (1, 2 * j + 1),
                (RecordingLayout::AlternatingBlocks, _) => (1, 2 * j + 2),
            };
            let id = format!("{}_{:04}", task.as_str(), i + 1);
            sentences.push(synth_sentence(spec, params, task, id, session_id, block_id, &effects, subject_id, rng));
        }
    }
    for i in 0..spec.sr_sentences {
        let session_id = if 2 * i < spec.sr_sentences { 1 } else { 2 };
        let block_id = 2 * b + session_id;
        let id = format!("SR_{:04}", i + 1);
        sentences.push(synth_sentence(
            spec, &spec.nr, TaskLabel::SR, id, session_id, block_id, &effects, subject_id, rng,
        ));
    }

    let mean_time = |task: TaskLabel| {
        let v: Vec<f64> = sentences
            .iter()
            .filter(|s| s.task_label == task)
            .map(|s| s.total_reading_ms / 1000.0)
            .collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let meta = SubjectMeta {
        subject_id: subject_id.to_string(),
        lextale: round2(rng.random_range(70.0..100.0)),
        score_nr: round2(rng.random_range(75.0..100.0)),
        score_tsr: round2(rng.random_range(75.0..100.0)),
        speed_nr: mean_time(TaskLabel::NR),
        speed_tsr: mean_time(TaskLabel::TSR),
    };
    SubjectData { meta, sentences }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

#[allow(clippy::too_many_arguments)]
fn synth_sentence(
    spec: &SynthSpec,
    params: &ClassParams,
    task: TaskLabel,
    sentence_id: String,
    session_id: u32,
    block_id: u32,
    effects: &SubjectEffects,
    subject_id: &str,
    rng: &mut ChaCha8Rng,
) -> SentenceRecording {
    let n_words = (spec.sentence_length.sample(rng).round() as i64).clamp(4, 60) as usize;
    let words: Vec<WordRecord> = (0..n_words)
        .map(|_| WordRecord {
            token: VOCABULARY[rng.random_range(0..VOCABULARY.len())].to_string(),
            band_power: None,
        })
        .collect();

    // Which words get fixated.
    let omission = params.omission_rate.sample(rng);
    let skipped = ((omission * n_words as f64).round().max(0.0) as usize).min(n_words - 1);
    let mut order: Vec<usize> = (0..n_words).collect();
    order.shuffle(rng);
    let mut fixated: Vec<usize> = order[..n_words - skipped].to_vec();
    fixated.sort_unstable();

    // Scan path: first pass over fixated words with refixations and regressions.
    let mut path = Vec::new();
    for (k, &w) in fixated.iter().enumerate() {
        path.push(w);
        if rng.random_bool(params.refixation_prob) {
            path.push(w);
        }
        if k > 0 && rng.random_bool(params.regression_prob) {
            path.push(fixated[rng.random_range(0..k)]);
        }
    }

    let mut saccades = Vec::with_capacity(path.len().saturating_sub(1));
    for pair in path.windows(2) {
        let (from, to) = (pair[0], pair[1]);
        let dist = from.abs_diff(to) as f64;
        let amplitude = if dist == 0.0 {
            0.3 + 0.1 * rng.random::<f64>()
        } else {
            (1.5 * dist + 0.2 * Normal::new(0.0_f64, 1.0).expect("unit").sample(rng)).max(0.1)
        };
        saccades.push(SaccadeEvent {
            duration_ms: params.saccade_duration_ms.sample(rng).round().clamp(8.0, 200.0),
            amplitude_deg: amplitude,
            velocity_degps: params.saccade_velocity_degps.sample(rng).clamp(20.0, 1000.0),
            from_word: Some(from),
            to_word: Some(to),
        });
    }

    // Fixation durations share whatever reading time the saccades leave.
    let drawn_ms = params.reading_time_s.sample(rng) * 1000.0;
    let sacc_total: f64 = saccades.iter().map(|s| s.duration_ms).sum();
    let budget = drawn_ms - sacc_total;
    let weights: Vec<f64> = path
        .iter()
        .map(|_| (1.0 + 0.35 * Normal::new(0.0_f64, 1.0).expect("unit").sample(rng)).clamp(0.2, 3.0))
        .collect();
    let wsum: f64 = weights.iter().sum();
    let mut fixations = Vec::with_capacity(path.len());
    let mut t = 0.0;
    for (k, (&w, weight)) in path.iter().zip(&weights).enumerate() {
        let duration = (budget * weight / wsum).round().max(30.0);
        fixations.push(FixationEvent {
            onset_ms: t,
            duration_ms: duration,
            word_index: w,
            fixation_order: k,
            band_power: None,
        });
        t += duration + saccades.get(k).map_or(0.0, |s| s.duration_ms);
    }
    let total_reading_ms = drawn_ms.round().max(t);

    let mut rec = SentenceRecording {
        sentence_id,
        task_label: task,
        session_id,
        block_id,
        total_reading_ms,
        words,
        fixations,
        saccades,
        band_power: None,
        continuous_eeg: None,
    };
    synth_eeg(spec, &mut rec, effects, subject_id, rng);
    rec
}

fn synth_eeg(
    spec: &SynthSpec,
    rec: &mut SentenceRecording,
    effects: &SubjectEffects,
    subject_id: &str,
    rng: &mut ChaCha8Rng,
) {
    let e = &spec.eeg;
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let block = &effects.block[&rec.block_id];
    let session = if rec.session_id == 2 { e.session_shift } else { 0.0 };

    let mut means: BTreeMap<Band, Vec<f64>> = BTreeMap::new();
    for band in Band::ALL {
        let mut m: Vec<f64> = (0..N_CHANNELS)
            .map(|c| e.base_amplitude[&band] + effects.offset[&band][c] + block[c] + session)
            .collect();
        if rec.task_label == TaskLabel::TSR {
            let shift = e.tsr_shift.get(&band).copied().unwrap_or(0.0);
            for &c in &e.informative_channels {
                m[c] += shift;
            }
        }
        means.insert(band, m);
    }
    let draw = |m: &[f64], sd: f64, rng: &mut ChaCha8Rng| -> Vec<f64> {
        m.iter().map(|&v| (v + sd * unit.sample(rng)).max(0.01)).collect()
    };

    if e.level != EegLevel::None {
        rec.band_power = Some(
            means
                .iter()
                .map(|(&band, m)| (band, draw(m, e.sentence_noise_std, rng)))
                .collect(),
        );
    }
    match e.level {
        EegLevel::Fixation => {
            for f in &mut rec.fixations {
                f.band_power = Some(means.iter().map(|(&band, m)| (band, draw(m, e.noise_std, rng))).collect());
            }
            for (w, word) in rec.words.iter_mut().enumerate() {
                let fix: Vec<&FixationEvent> = rec.fixations.iter().filter(|f| f.word_index == w).collect();
                if fix.is_empty() {
                    continue;
                }
                let total: f64 = fix.iter().map(|f| f.duration_ms).sum();
                let mut bp = BandPowerMap::new();
                for band in Band::ALL {
                    let mut acc = vec![0.0; N_CHANNELS];
                    for f in &fix {
                        let v = &f.band_power.as_ref().expect("set above")[&band];
                        for (a, x) in acc.iter_mut().zip(v) {
                            *a += f.duration_ms * x;
                        }
                    }
                    acc.iter_mut().for_each(|a| *a /= total);
                    bp.insert(band, acc);
                }
                word.band_power = Some(bp);
            }
        }
        EegLevel::Word => {
            for w in 0..rec.words.len() {
                if rec.fixations.iter().any(|f| f.word_index == w) {
                    rec.words[w].band_power =
                        Some(means.iter().map(|(&band, m)| (band, draw(m, e.noise_std, rng))).collect());
                }
            }
        }
        EegLevel::Sentence | EegLevel::None => {}
    }

    if let Some(cont) = &e.continuous {
        let fs = cont.sample_rate_hz;
        let n_samples = (rec.total_reading_ms * fs / 1000.0).ceil() as usize + 1;
        let mut data = Vec::with_capacity(N_CHANNELS * n_samples);
        for c in 0..N_CHANNELS {
            let tones: Vec<(f64, f64, f64)> = Band::OSCILLATORY
                .iter()
                .map(|b| {
                    let r = b.range();
                    let amp = means[b][c].max(0.0);
                    (amp, 0.5 * (r.low_hz + r.high_hz), rng.random_range(0.0..2.0 * PI))
                })
                .collect();
            for i in 0..n_samples {
                let t = i as f64 / fs;
                let mut v: f64 = tones.iter().map(|(a, f, ph)| a * (2.0 * PI * f * t + ph).sin()).sum();
                v += cont.noise_std * unit.sample(rng);
                data.push(v as f32);
            }
        }
        rec.continuous_eeg = Some(ContinuousEeg {
            n_channels: N_CHANNELS,
            n_samples,
            sample_rate_hz: fs,
            file: eeg_payload_path(subject_id, &rec.sentence_id),
            data,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthSpec {
        SynthSpec {
            n_subjects: 3,
            sentences_per_class: 40,
            ..SynthSpec::default()
        }
    }

    fn realized_omission(s: &SentenceRecording) -> f64 {
        1.0 - s.fixated_word_count() as f64 / s.words.len() as f64
    }

    #[test]
    fn same_seed_same_corpus() {
        let a = synthesize_corpus(&small(), 7).unwrap();
        let b = synthesize_corpus(&small(), 7).unwrap();
        let c = synthesize_corpus(&small(), 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn omission_means_within_three_standard_errors() {
        let spec = SynthSpec::default();
        let corpus = synthesize_corpus(&spec, 7).unwrap();
        for (task, law) in [(TaskLabel::NR, spec.nr.omission_rate), (TaskLabel::TSR, spec.tsr.omission_rate)] {
            let v: Vec<f64> = corpus
                .subjects
                .iter()
                .flat_map(|s| &s.sentences)
                .filter(|s| s.task_label == task)
                .map(realized_omission)
                .collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let se = law.std / (v.len() as f64).sqrt();
            assert!((mean - law.mean).abs() <= 3.0 * se, "{task:?}: {mean} vs {}", law.mean);
        }
    }

    #[test]
    fn reading_time_means_within_three_standard_errors() {
        let spec = SynthSpec::default();
        let corpus = synthesize_corpus(&spec, 11).unwrap();
        for (task, law) in [(TaskLabel::NR, spec.nr.reading_time_s), (TaskLabel::TSR, spec.tsr.reading_time_s)] {
            let v: Vec<f64> = corpus
                .subjects
                .iter()
                .flat_map(|s| &s.sentences)
                .filter(|s| s.task_label == task)
                .map(|s| s.total_reading_ms / 1000.0)
                .collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let se = law.std / (v.len() as f64).sqrt();
            assert!((mean - law.mean).abs() <= 3.0 * se, "{task:?}: {mean} vs {}", law.mean);
        }
    }

    #[test]
    fn skipped_words_receive_no_fixation() {
        let corpus = synthesize_corpus(&small(), 3).unwrap();
        for s in corpus.subjects.iter().flat_map(|s| &s.sentences) {
            let fixated = s.fixated_word_count();
            let expected = s.words.len() as f64 * (1.0 - realized_omission(s));
            assert_eq!(fixated as f64, expected.round());
            assert!(fixated >= 1);
            assert_eq!(s.saccades.len() + 1, s.fixations.len());
        }
    }

    #[test]
    fn layouts_assign_sessions_and_blocks() {
        let mut spec = SynthSpec::alternating_blocks();
        spec.n_subjects = 1;
        spec.sr_sentences = 4;
        let c = synthesize_corpus(&spec, 1).unwrap();
        let s = &c.subjects[0].sentences;
        let blocks: BTreeSet<u32> = s.iter().filter(|r| r.task_label != TaskLabel::SR).map(|r| r.block_id).collect();
        assert_eq!(blocks, (1..=14).collect());
        for r in s {
            match r.task_label {
                TaskLabel::NR => assert!(r.block_id % 2 == 1 && r.session_id == 1),
                TaskLabel::TSR => assert!(r.block_id % 2 == 0 && r.session_id == 1),
                TaskLabel::SR => assert!(r.block_id > 14),
            }
        }
        let sessions: BTreeSet<u32> = s.iter().filter(|r| r.task_label == TaskLabel::SR).map(|r| r.session_id).collect();
        assert_eq!(sessions, [1, 2].into());

        let c = synthesize_corpus(&small(), 1).unwrap();
        for r in &c.subjects[0].sentences {
            let want = if r.task_label == TaskLabel::NR { 1 } else { 2 };
            assert_eq!(r.session_id, want);
        }
    }

    #[test]
    fn eeg_levels_populate_the_requested_records() {
        let mut spec = small();
        spec.n_subjects = 1;
        spec.sentences_per_class = 3;
        spec.eeg.level = EegLevel::Fixation;
        let c = synthesize_corpus(&spec, 2).unwrap();
        for s in &c.subjects[0].sentences {
            assert!(s.band_power.is_some());
            assert!(s.fixations.iter().all(|f| f.band_power.is_some()));
            for (w, word) in s.words.iter().enumerate() {
                assert_eq!(word.band_power.is_some(), s.fixations_on(w).next().is_some());
            }
        }
        spec.eeg.level = EegLevel::None;
        let c = synthesize_corpus(&spec, 2).unwrap();
        assert!(c.subjects[0].sentences.iter().all(|s| s.band_power.is_none()));
    }

    #[test]
    fn continuous_eeg_covers_every_fixation() {
        let mut spec = small();
        spec.n_subjects = 1;
        spec.sentences_per_class = 2;
        spec.eeg.continuous = Some(ContinuousSynth {
            sample_rate_hz: 500.0,
            noise_std: 0.1,
        });
        let c = synthesize_corpus(&spec, 5).unwrap();
        for s in &c.subjects[0].sentences {
            let eeg = s.continuous_eeg.as_ref().unwrap();
            assert_eq!(eeg.data.len(), eeg.n_channels * eeg.n_samples);
            assert!(s.fixations.iter().all(|f| f.end_ms() <= eeg.duration_ms()));
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let mut spec = small();
        spec.nr.omission_rate.std = 0.0;
        assert!(matches!(synthesize_corpus(&spec, 0), Err(Error::Parameter(_))));
        let spec = SynthSpec {
            n_subjects: 0,
            ..small()
        };
        assert!(matches!(synthesize_corpus(&spec, 0), Err(Error::Parameter(_))));
        let mut spec = small();
        spec.eeg.noise_std = -1.0;
        assert!(matches!(synthesize_corpus(&spec, 0), Err(Error::Parameter(_))));
    }
}
