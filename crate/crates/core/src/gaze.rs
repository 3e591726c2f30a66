//! Word- and sentence-level eye-tracking features.

use serde::{Deserialize, Serialize};

use crate::corpus::{FixationEvent, SaccadeEvent, SentenceRecording};
use crate::error::{Error, Result};

pub const WORD_FIXATION_NAMES: [&str; 5] = ["nFix", "FFD", "TRT", "GD", "GPT"];

pub const WORD_SACCADE_NAMES: [&str; 12] = [
    "inSacc_velocity_mean",
    "inSacc_duration_mean",
    "inSacc_amplitude_mean",
    "outSacc_velocity_mean",
    "outSacc_duration_mean",
    "outSacc_amplitude_mean",
    "inSacc_velocity_max",
    "inSacc_duration_max",
    "inSacc_amplitude_max",
    "outSacc_velocity_max",
    "outSacc_duration_max",
    "outSacc_amplitude_max",
];

pub const SENT_GAZE_NAMES: [&str; 3] = ["omission_rate", "fixation_number", "reading_speed"];

pub const SENT_SACCADE_NAMES: [&str; 6] = [
    "mean_sacc_dur",
    "max_sacc_dur",
    "mean_sacc_velocity",
    "max_sacc_velocity",
    "mean_sacc_amp",
    "max_sacc_amp",
];

/// Fixation measures in ms; saccade statistics as in [`WORD_SACCADE_NAMES`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WordGazeFeatures {
    pub n_fix: f64,
    pub ffd: f64,
    pub trt: f64,
    pub gd: f64,
    pub gpt: f64,
    pub saccades: [f64; 12],
}

impl WordGazeFeatures {
    /// 5 values, or 17 with saccade features, in table order.
    pub fn to_vec(&self, include_saccades: bool) -> Vec<f64> {
        let mut v = vec![self.n_fix, self.ffd, self.trt, self.gd, self.gpt];
        if include_saccades {
            v.extend_from_slice(&self.saccades);
        }
        v
    }
}

pub fn word_feature_names(include_saccades: bool) -> Vec<&'static str> {
    let mut v = WORD_FIXATION_NAMES.to_vec();
    if include_saccades {
        v.extend(WORD_SACCADE_NAMES);
    }
    v
}

/// Fixations sorted by `fixation_order`.
pub(crate) fn chronological(s: &SentenceRecording) -> Vec<&FixationEvent> {
    let mut f: Vec<&FixationEvent> = s.fixations.iter().collect();
    f.sort_by_key(|f| f.fixation_order);
    f
}

/// Mean and max of velocity, duration and amplitude; zeros when empty.
fn saccade_stats<'a>(it: impl Iterator<Item = &'a SaccadeEvent>) -> ([f64; 3], [f64; 3]) {
    let (mut sum, mut max, mut n) = ([0.0; 3], [0.0_f64; 3], 0usize);
    for s in it {
        for (k, v) in [s.velocity_degps, s.duration_ms, s.amplitude_deg].into_iter().enumerate() {
            sum[k] += v;
            max[k] = max[k].max(v);
        }
        n += 1;
    }
    if n > 0 {
        sum.iter_mut().for_each(|v| *v /= n as f64);
    }
    (sum, max)
}

/// One entry per word; never-fixated words are all zeros.
///
/// GD is the first run of consecutive fixations on the word. GPT sums every
/// fixation from the first one on the word up to (not including) the first
/// fixation on a later word; for the last word it runs to the end.
pub fn word_gaze_features(s: &SentenceRecording) -> Vec<WordGazeFeatures> {
    let fix = chronological(s);
    (0..s.words.len())
        .map(|w| {
            let Some(first) = fix.iter().position(|f| f.word_index == w) else {
                return WordGazeFeatures::default();
            };
            let on_word = fix.iter().filter(|f| f.word_index == w);
            let n_fix = on_word.clone().count() as f64;
            let trt = on_word.map(|f| f.duration_ms).sum();
            let gd = fix[first..]
                .iter()
                .take_while(|f| f.word_index == w)
                .map(|f| f.duration_ms)
                .sum();
            let gpt = fix[first..]
                .iter()
                .take_while(|f| f.word_index <= w)
                .map(|f| f.duration_ms)
                .sum();
            let (in_mean, in_max) = saccade_stats(s.saccades.iter().filter(|x| x.to_word == Some(w)));
            let (out_mean, out_max) = saccade_stats(s.saccades.iter().filter(|x| x.from_word == Some(w)));
            let mut saccades = [0.0; 12];
            saccades[0..3].copy_from_slice(&in_mean);
            saccades[3..6].copy_from_slice(&out_mean);
            saccades[6..9].copy_from_slice(&in_max);
            saccades[9..12].copy_from_slice(&out_max);
            WordGazeFeatures {
                n_fix,
                ffd: fix[first].duration_ms,
                trt,
                gd,
                gpt,
                saccades,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SentenceGazeFeatures {
    pub omission_rate: f64,
    /// Fixations per word.
    pub fixation_number: f64,
    /// Summed fixation duration per word, seconds.
    pub reading_speed: f64,
    /// Summed saccade duration divided by the number of words.
    pub mean_sacc_dur: f64,
    pub max_sacc_dur: f64,
    /// Divided by the number of saccades.
    pub mean_sacc_velocity: f64,
    pub max_sacc_velocity: f64,
    /// Divided by the number of saccades.
    pub mean_sacc_amp: f64,
    pub max_sacc_amp: f64,
}

impl SentenceGazeFeatures {
    pub fn gaze(&self) -> [f64; 3] {
        [self.omission_rate, self.fixation_number, self.reading_speed]
    }

    pub fn saccade(&self) -> [f64; 6] {
        [
            self.mean_sacc_dur,
            self.max_sacc_dur,
            self.mean_sacc_velocity,
            self.max_sacc_velocity,
            self.mean_sacc_amp,
            self.max_sacc_amp,
        ]
    }

    /// Look up a single feature by its exported name.
    pub fn get(&self, name: &str) -> Option<f64> {
        SENT_GAZE_NAMES
            .iter()
            .zip(self.gaze())
            .chain(SENT_SACCADE_NAMES.iter().zip(self.saccade()))
            .find(|(n, _)| **n == name)
            .map(|(_, v)| v)
    }
}

pub fn sentence_gaze_features(s: &SentenceRecording) -> Result<SentenceGazeFeatures> {
    let n_words = s.words.len();
    if n_words == 0 {
        return Err(Error::Empty(format!("sentence {} has no words", s.sentence_id)));
    }
    let w = n_words as f64;
    let fix_total: f64 = s.fixations.iter().map(|f| f.duration_ms).sum();
    let n_sacc = s.saccades.len();
    let (mut dur, mut vel, mut amp) = (0.0, 0.0, 0.0);
    let (mut max_dur, mut max_vel, mut max_amp) = (0.0_f64, 0.0_f64, 0.0_f64);
    for x in &s.saccades {
        dur += x.duration_ms;
        vel += x.velocity_degps;
        amp += x.amplitude_deg;
        max_dur = max_dur.max(x.duration_ms);
        max_vel = max_vel.max(x.velocity_degps);
        max_amp = max_amp.max(x.amplitude_deg);
    }
    let per_sacc = |v: f64| if n_sacc == 0 { 0.0 } else { v / n_sacc as f64 };
    Ok(SentenceGazeFeatures {
        omission_rate: (n_words - s.fixated_word_count()) as f64 / w,
        fixation_number: s.fixations.len() as f64 / w,
        reading_speed: fix_total / w / 1000.0,
        mean_sacc_dur: dur / w,
        max_sacc_dur: max_dur,
        mean_sacc_velocity: per_sacc(vel),
        max_sacc_velocity: max_vel,
        mean_sacc_amp: per_sacc(amp),
        max_sacc_amp: max_amp,
    })
}
