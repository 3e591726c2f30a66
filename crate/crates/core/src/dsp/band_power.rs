use rayon::prelude::*;

use super::{bandpass, hilbert_envelope, BandPowerVector, FrequencyBand, PowerMode};
use crate::error::{Error, Result};

/// A time window relative to sentence onset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub onset_ms: f64,
    pub duration_ms: f64,
}

impl Segment {
    pub fn new(onset_ms: f64, duration_ms: f64) -> Self {
        Segment { onset_ms, duration_ms }
    }

    /// Half-open sample range; at least one sample long.
    fn samples(&self, sample_rate_hz: f64) -> (isize, isize) {
        let to_sample = |ms: f64| (ms * sample_rate_hz / 1000.0).round() as isize;
        let start = to_sample(self.onset_ms);
        let end = to_sample(self.onset_ms + self.duration_ms).max(start + 1);
        (start, end)
    }
}

/// Band-passed Hilbert envelope of every channel over the whole recording.
pub fn channel_envelopes(
    channels: &[Vec<f64>],
    band: &FrequencyBand,
    sample_rate_hz: f64,
) -> Result<Vec<Vec<f64>>> {
    band.validate(sample_rate_hz)?;
    channels
        .par_iter()
        .map(|x| hilbert_envelope(&bandpass(x, band, sample_rate_hz)?))
        .collect()
}

/// Per-channel mean of `envelopes` over the union of `segments`.
pub fn segment_mean(
    envelopes: &[Vec<f64>],
    sample_rate_hz: f64,
    segments: &[Segment],
    mode: PowerMode,
) -> Result<Vec<f64>> {
    if segments.is_empty() {
        return Err(Error::NoFixations("empty segment list".into()));
    }
    let n = envelopes.first().map_or(0, Vec::len);
    let mut mask = vec![false; n];
    for seg in segments {
        let (start, end) = seg.samples(sample_rate_hz);
        if seg.onset_ms < 0.0 || !seg.duration_ms.is_finite() || start < 0 || end > n as isize {
            return Err(Error::Range(format!(
                "segment {}+{} ms outside recording of {} ms",
                seg.onset_ms,
                seg.duration_ms,
                n as f64 * 1000.0 / sample_rate_hz
            )));
        }
        mask[start as usize..end as usize].fill(true);
    }
    let count = mask.iter().filter(|&&m| m).count() as f64;
    Ok(envelopes
        .iter()
        .map(|env| {
            let sum: f64 = env
                .iter()
                .zip(&mask)
                .filter(|(_, &m)| m)
                .map(|(&v, _)| match mode {
                    PowerMode::Amplitude => v,
                    PowerMode::AmplitudeSquared => v * v,
                })
                .sum();
            sum / count
        })
        .collect())
}

/// Band power of each channel over the union of `segments`. The envelope is
/// computed once over the full recording and then averaged over the
/// selected samples.
pub fn segment_band_power(
    channels: &[Vec<f64>],
    band: &FrequencyBand,
    sample_rate_hz: f64,
    segments: &[Segment],
    mode: PowerMode,
) -> Result<BandPowerVector> {
    if segments.is_empty() {
        return Err(Error::NoFixations("empty segment list".into()));
    }
    let env = channel_envelopes(channels, band, sample_rate_hz)?;
    Ok(BandPowerVector {
        band: band.name.clone(),
        values: segment_mean(&env, sample_rate_hz, segments, mode)?,
    })
}
