//! Word- and sentence-level EEG features.
//!
//! Band power comes from whatever the recording carries, in this order:
//! per-fixation vectors, continuous EEG (through [`crate::dsp`]), word
//! vectors. Sentence vectors come from the stored sentence vector or from
//! continuous EEG over the whole reading duration.

use serde::{Deserialize, Serialize};

use crate::corpus::{SentenceRecording, N_CHANNELS};
use crate::dsp::{channel_envelopes, segment_mean, Band, FrequencyBand, PowerMode, Segment};
use crate::error::{Error, Result};
use crate::gaze::chronological;

/// Fractions used by the fixation ablation sweep.
pub const ABLATION_FRACTIONS: [f64; 5] = [0.10, 0.20, 0.50, 0.75, 1.0];

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EegConfig {
    pub power: PowerMode,
    /// Split each band into two halves (8 sub-bands); needs continuous EEG.
    pub subbands: bool,
}

fn no_data(s: &SentenceRecording, what: &str) -> Error {
    Error::Data(format!("sentence {} has no {what}", s.sentence_id))
}

fn continuous_channels(s: &SentenceRecording) -> Option<(Vec<Vec<f64>>, f64)> {
    let eeg = s.continuous_eeg.as_ref()?;
    let channels = (0..eeg.n_channels)
        .map(|c| eeg.channel(c).iter().map(|&v| f64::from(v)).collect())
        .collect();
    Some((channels, eeg.sample_rate_hz))
}

/// Per-fixation vectors, aligned with `s.fixations`. `None` when the
/// recording has neither fixation vectors nor continuous EEG.
pub fn fixation_band_power(s: &SentenceRecording, band: Band, cfg: &EegConfig) -> Result<Option<Vec<Vec<f64>>>> {
    if !s.fixations.is_empty() {
        let stored: Option<Vec<Vec<f64>>> = s
            .fixations
            .iter()
            .map(|f| f.band_power.as_ref().and_then(|m| m.get(&band)).cloned())
            .collect();
        if stored.is_some() {
            return Ok(stored);
        }
    }
    let Some((channels, fs)) = continuous_channels(s) else {
        return Ok(None);
    };
    let env = channel_envelopes(&channels, &band.range(), fs)?;
    s.fixations
        .iter()
        .map(|f| segment_mean(&env, fs, &[Segment::new(f.onset_ms, f.duration_ms)], cfg.power))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

/// One 105-vector per word: the fixation-duration-weighted mean of its
/// fixation vectors; zeros for skipped words.
pub fn word_eeg_features(s: &SentenceRecording, band: Band, cfg: &EegConfig) -> Result<Vec<Vec<f64>>> {
    if let Some(per_fix) = fixation_band_power(s, band, cfg)? {
        let mut out = vec![vec![0.0; N_CHANNELS]; s.words.len()];
        let mut weight = vec![0.0; s.words.len()];
        for (f, v) in s.fixations.iter().zip(&per_fix) {
            for (o, x) in out[f.word_index].iter_mut().zip(v) {
                *o += f.duration_ms * x;
            }
            weight[f.word_index] += f.duration_ms;
        }
        for (o, w) in out.iter_mut().zip(weight) {
            if w > 0.0 {
                o.iter_mut().for_each(|x| *x /= w);
            }
        }
        return Ok(out);
    }
    let fixated: Vec<bool> = (0..s.words.len()).map(|w| s.fixations_on(w).next().is_some()).collect();
    s.words
        .iter()
        .zip(fixated)
        .map(|(word, fixated)| {
            if !fixated {
                return Ok(vec![0.0; N_CHANNELS]);
            }
            word.band_power
                .as_ref()
                .and_then(|m| m.get(&band).cloned())
                .ok_or_else(|| no_data(s, &format!("{band} band power for word '{}'", word.token)))
        })
        .collect()
}

fn continuous_sentence_vector(s: &SentenceRecording, fb: &FrequencyBand, cfg: &EegConfig) -> Result<Option<Vec<f64>>> {
    let Some((channels, fs)) = continuous_channels(s) else {
        return Ok(None);
    };
    let eeg = s.continuous_eeg.as_ref().expect("checked above");
    let duration = s.total_reading_ms.min(eeg.duration_ms());
    let env = channel_envelopes(&channels, fb, fs)?;
    segment_mean(&env, fs, &[Segment::new(0.0, duration)], cfg.power).map(Some)
}

/// Whole-sentence per-channel band power. With `cfg.subbands` and
/// continuous EEG, the mean of the two half-band vectors.
pub fn sentence_band_vector(s: &SentenceRecording, band: Band, cfg: &EegConfig) -> Result<Vec<f64>> {
    if cfg.subbands && band != Band::Broadband && s.continuous_eeg.is_some() {
        let [lo, hi] = band_halves_vectors(s, band, cfg)?;
        return Ok(lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect());
    }
    if let Some(v) = s.band_power.as_ref().and_then(|m| m.get(&band)) {
        return Ok(v.clone());
    }
    continuous_sentence_vector(s, &band.range(), cfg)?
        .ok_or_else(|| no_data(s, &format!("sentence-level {band} band power or continuous EEG")))
}

fn band_halves_vectors(s: &SentenceRecording, band: Band, cfg: &EegConfig) -> Result<[Vec<f64>; 2]> {
    let [a, b] = band.halves();
    let get = |fb: &FrequencyBand| {
        continuous_sentence_vector(s, fb, cfg)?
            .ok_or_else(|| no_data(s, &format!("continuous EEG for sub-band {}", fb.name)))
    };
    Ok([get(&a)?, get(&b)?])
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn sentence_eeg_set_names() -> Vec<String> {
    let mut v: Vec<String> = Band::OSCILLATORY.iter().map(|b| format!("{b}_mean")).collect();
    v.push("eeg_means".into());
    v.extend(Band::ALL.iter().map(|b| format!("electrode_features_{b}")));
    v.push("electrode_features_all".into());
    v
}

/// Column names of a sentence EEG set.
pub fn sentence_eeg_feature_names(set_name: &str, cfg: &EegConfig) -> Result<Vec<String>> {
    let channels = |b: &'static str| (0..N_CHANNELS).map(move |c| format!("{b}_e{c}"));
    if let Some(b) = set_name.strip_suffix("_mean") {
        let band = Band::parse(b)?;
        return Ok(vec![format!("{band}_mean")]);
    }
    match set_name {
        "eeg_means" => Ok(if cfg.subbands {
            Band::OSCILLATORY.iter().flat_map(|b| b.halves()).map(|h| format!("{}_mean", h.name)).collect()
        } else {
            Band::OSCILLATORY.iter().map(|b| format!("{b}_mean")).collect()
        }),
        "electrode_features_all" => Ok(Band::OSCILLATORY.iter().flat_map(|b| channels(b.name())).collect()),
        _ => match set_name.strip_prefix("electrode_features_").map(Band::parse) {
            Some(Ok(band)) => Ok(channels(band.name()).collect()),
            _ => Err(unknown_set(set_name)),
        },
    }
}

fn unknown_set(name: &str) -> Error {
    Error::UnknownName {
        kind: "sentence EEG feature set",
        name: name.to_string(),
        valid: sentence_eeg_set_names(),
    }
}

/// Sentence-level EEG feature vector for `set_name`.
///
/// `electrode_features_all` concatenates theta, alpha, beta, gamma.
pub fn sentence_eeg_features(s: &SentenceRecording, set_name: &str, cfg: &EegConfig) -> Result<Vec<f64>> {
    if let Some(b) = set_name.strip_suffix("_mean") {
        let band = Band::parse(b).map_err(|_| unknown_set(set_name))?;
        return Ok(vec![mean(&sentence_band_vector(s, band, cfg)?)]);
    }
    match set_name {
        "eeg_means" if cfg.subbands => {
            let mut out = Vec::with_capacity(8);
            for band in Band::OSCILLATORY {
                for h in band_halves_vectors(s, band, cfg)? {
                    out.push(mean(&h));
                }
            }
            Ok(out)
        }
        "eeg_means" => Band::OSCILLATORY
            .iter()
            .map(|&b| sentence_band_vector(s, b, cfg).map(|v| mean(&v)))
            .collect(),
        "electrode_features_all" => {
            let mut out = Vec::with_capacity(4 * N_CHANNELS);
            for band in Band::OSCILLATORY {
                out.extend(sentence_band_vector(s, band, cfg)?);
            }
            Ok(out)
        }
        _ => match set_name.strip_prefix("electrode_features_").map(Band::parse) {
            Some(Ok(band)) => sentence_band_vector(s, band, cfg),
            _ => Err(unknown_set(set_name)),
        },
    }
}

/// Number of fixations kept for `fraction`: `⌈fraction·n⌉`, at least one.
pub fn ablation_count(n_fix: usize, fraction: f64) -> usize {
    // Guard against products like 0.1·30 = 3.0000000000000004.
    (((fraction * n_fix as f64) - 1e-9).ceil() as usize).clamp(1, n_fix)
}

/// Unweighted mean of the first `⌈p·n_fix⌉` fixations' band power, in
/// chronological order. Without fixation-level EEG each selected fixation
/// contributes its word's vector.
pub fn ablated_word_eeg(s: &SentenceRecording, band: Band, fraction: f64, cfg: &EegConfig) -> Result<Vec<f64>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Parameter(format!("ablation fraction must lie in (0, 1], got {fraction}")));
    }
    if s.fixations.is_empty() {
        return Err(Error::NoFixations(format!("sentence {}", s.sentence_id)));
    }
    let k = ablation_count(s.fixations.len(), fraction);
    let order = chronological(s);
    let per_fix = fixation_band_power(s, band, cfg)?;
    let mut acc = vec![0.0; N_CHANNELS];
    for f in order.iter().take(k) {
        let v = match &per_fix {
            Some(p) => {
                let i = s.fixations.iter().position(|g| std::ptr::eq(g, *f)).expect("same sentence");
                &p[i]
            }
            None => s.words[f.word_index]
                .band_power
                .as_ref()
                .and_then(|m| m.get(&band))
                .ok_or_else(|| no_data(s, &format!("fixation, continuous or word {band} band power")))?,
        };
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    acc.iter_mut().for_each(|a| *a /= k as f64);
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{BandPowerMap, ContinuousEeg};
    use crate::gaze::tests::sentence;
    use std::f64::consts::PI;

    fn bp(band: Band, v: Vec<f64>) -> BandPowerMap {
        [(band, v)].into_iter().collect()
    }

    fn with_fixation_vectors(s: &mut SentenceRecording, vals: &[f64]) {
        for (f, &c) in s.fixations.iter_mut().zip(vals) {
            f.band_power = Some(bp(Band::Gamma, vec![c; N_CHANNELS]));
        }
    }

    const CFG: EegConfig = EegConfig {
        power: PowerMode::Amplitude,
        subbands: false,
    };

    #[test]
    fn single_fixation_returns_its_vector() {
        let mut s = sentence(2, &[(0, 120.0)]);
        let v: Vec<f64> = (0..N_CHANNELS).map(|c| c as f64).collect();
        s.fixations[0].band_power = Some(bp(Band::Gamma, v.clone()));
        let w = word_eeg_features(&s, Band::Gamma, &CFG).unwrap();
        assert_eq!(w[0], v);
        assert_eq!(w[1], vec![0.0; N_CHANNELS]);
    }

    #[test]
    fn duration_weighted_mean() {
        let mut s = sentence(1, &[(0, 100.0), (0, 300.0)]);
        with_fixation_vectors(&mut s, &[1.0, 5.0]);
        let w = word_eeg_features(&s, Band::Gamma, &CFG).unwrap();
        assert!(w[0].iter().all(|&x| (x - 4.0).abs() < 1e-12));
    }

    #[test]
    fn word_vectors_are_the_fallback() {
        let mut s = sentence(2, &[(1, 100.0)]);
        s.words[1].band_power = Some(bp(Band::Alpha, vec![2.0; N_CHANNELS]));
        let w = word_eeg_features(&s, Band::Alpha, &CFG).unwrap();
        assert_eq!(w[1], vec![2.0; N_CHANNELS]);
        assert_eq!(w[0], vec![0.0; N_CHANNELS]);
        assert_eq!(word_eeg_features(&s, Band::Beta, &CFG).unwrap_err().kind(), "data");
    }

    fn with_sentence_vectors(s: &mut SentenceRecording) {
        s.band_power = Some(
            Band::ALL
                .iter()
                .enumerate()
                .map(|(i, &b)| (b, vec![i as f64 + 1.0; N_CHANNELS]))
                .collect(),
        );
    }

    #[test]
    fn sentence_set_dimensions_and_order() {
        let mut s = sentence(3, &[(0, 100.0)]);
        with_sentence_vectors(&mut s);
        let all = sentence_eeg_features(&s, "electrode_features_all", &CFG).unwrap();
        assert_eq!(all.len(), 420);
        for (i, b) in Band::OSCILLATORY.iter().enumerate() {
            let one = sentence_eeg_features(&s, &format!("electrode_features_{b}"), &CFG).unwrap();
            assert_eq!(&all[i * N_CHANNELS..(i + 1) * N_CHANNELS], one.as_slice());
        }
        assert_eq!(sentence_eeg_features(&s, "eeg_means", &CFG).unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(sentence_eeg_features(&s, "gamma_mean", &CFG).unwrap(), vec![4.0]);
        for name in sentence_eeg_set_names() {
            let v = sentence_eeg_features(&s, &name, &CFG).unwrap();
            assert_eq!(v.len(), sentence_eeg_feature_names(&name, &CFG).unwrap().len(), "{name}");
        }
        let err = sentence_eeg_features(&s, "delta_mean", &CFG).unwrap_err();
        assert_eq!(err.kind(), "unknown_name");
    }

    #[test]
    fn missing_eeg_is_a_data_error() {
        let s = sentence(3, &[(0, 100.0)]);
        assert_eq!(sentence_eeg_features(&s, "theta_mean", &CFG).unwrap_err().kind(), "data");
    }

    #[test]
    fn ablation_counts() {
        assert_eq!(ablation_count(10, 0.2), 2);
        assert_eq!(ablation_count(3, 0.1), 1);
        assert_eq!(ablation_count(30, 0.1), 3);
        assert_eq!(ablation_count(7, 1.0), 7);
        assert_eq!(ablation_count(4, 0.75), 3);
    }

    #[test]
    fn ablation_takes_earliest_fixations_unweighted() {
        let fix: Vec<(usize, f64)> = (0..10).map(|i| (i % 3, 100.0 + 10.0 * i as f64)).collect();
        let mut s = sentence(3, &fix);
        let vals: Vec<f64> = (0..10).map(|i| i as f64).collect();
        with_fixation_vectors(&mut s, &vals);
        // Storage order differs from chronological order.
        s.fixations.reverse();
        let v = ablated_word_eeg(&s, Band::Gamma, 0.2, &CFG).unwrap();
        assert!(v.iter().all(|&x| (x - 0.5).abs() < 1e-12));
        let full = ablated_word_eeg(&s, Band::Gamma, 1.0, &CFG).unwrap();
        assert!(full.iter().all(|&x| (x - 4.5).abs() < 1e-12));
        let one = ablated_word_eeg(&s, Band::Gamma, 0.05, &CFG).unwrap();
        assert!(one.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn ablation_errors() {
        let s = sentence(3, &[]);
        assert_eq!(ablated_word_eeg(&s, Band::Gamma, 0.5, &CFG).unwrap_err().kind(), "no_fixations");
        let s = sentence(3, &[(0, 100.0)]);
        assert_eq!(ablated_word_eeg(&s, Band::Gamma, 0.0, &CFG).unwrap_err().kind(), "parameter");
        assert_eq!(ablated_word_eeg(&s, Band::Gamma, 0.5, &CFG).unwrap_err().kind(), "data");
    }

    fn constant_envelope_sentence(c: f64) -> SentenceRecording {
        let fs = 500.0;
        let n = 2000;
        let mut s = sentence(3, &[(0, 300.0), (1, 200.0), (2, 250.0), (0, 150.0)]);
        s.total_reading_ms = 4000.0;
        // Keep fixations clear of the filter's edge transients.
        for f in &mut s.fixations {
            f.onset_ms += 500.0;
        }
        let mut data = Vec::with_capacity(N_CHANNELS * n);
        for ch in 0..N_CHANNELS {
            let ph = ch as f64 * 0.1;
            data.extend((0..n).map(|i| (c * (2.0 * PI * 40.0 * i as f64 / fs + ph).sin()) as f32));
        }
        s.continuous_eeg = Some(ContinuousEeg {
            n_channels: N_CHANNELS,
            n_samples: n,
            sample_rate_hz: fs,
            file: String::new(),
            data,
        });
        s
    }

    #[test]
    fn continuous_constant_envelope_gives_constant_features() {
        let c = 2.5;
        let s = constant_envelope_sentence(c);
        let close = |v: &[f64]| v.iter().all(|&x| (x - c).abs() <= 0.01 * c);
        for w in word_eeg_features(&s, Band::Gamma, &CFG).unwrap() {
            assert!(close(&w), "{:?}", w.iter().cloned().fold(f64::INFINITY, f64::min));
        }
        assert!(close(&sentence_eeg_features(&s, "electrode_features_gamma", &CFG).unwrap()));
        assert!(close(&sentence_eeg_features(&s, "gamma_mean", &CFG).unwrap()));
        for p in ABLATION_FRACTIONS {
            assert!(close(&ablated_word_eeg(&s, Band::Gamma, p, &CFG).unwrap()));
        }
        let sq = EegConfig {
            power: PowerMode::AmplitudeSquared,
            subbands: false,
        };
        let v = sentence_eeg_features(&s, "gamma_mean", &sq).unwrap()[0];
        assert!((v - c * c).abs() <= 0.02 * c * c);
    }

    #[test]
    fn subbands_give_eight_means() {
        let s = constant_envelope_sentence(1.0);
        let cfg = EegConfig {
            power: PowerMode::Amplitude,
            subbands: true,
        };
        let v = sentence_eeg_features(&s, "eeg_means", &cfg).unwrap();
        assert_eq!(v.len(), 8);
        assert_eq!(sentence_eeg_feature_names("eeg_means", &cfg).unwrap().len(), 8);
        // The 40 Hz tone sits in the lower gamma half (30.5-40 Hz) edge region; the upper
        // theta half sees almost nothing.
        assert!(v[1] < 0.05);
    }
}
