//! Butterworth band-pass design (second-order sections) and zero-phase
//! forward-backward filtering.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::FrequencyBand;
use crate::error::{Error, Result};

/// Prototype order of the band-pass filters used for band power. The
/// resulting band-pass has twice this many poles.
pub const DEFAULT_ORDER: usize = 4;

/// One second-order section, `a[0]` normalized to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (self.a[0] + self.a[1] + self.a[2])
    }

    /// Transposed direct-form II state for a unit step at steady state.
    fn step_state(&self) -> [f64; 2] {
        let y = self.dc_gain();
        [y - self.b[0], self.b[2] - self.a[2] * y]
    }

    fn response(&self, z_inv: Complex64) -> Complex64 {
        let num = self.b[0] + z_inv * (self.b[1] + z_inv * self.b[2]);
        let den = self.a[0] + z_inv * (self.a[1] + z_inv * self.a[2]);
        num / den
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SosFilter {
    pub sections: Vec<Biquad>,
}

impl SosFilter {
    /// Total filter order (number of poles).
    pub fn order(&self) -> usize {
        2 * self.sections.len()
    }

    /// Magnitude response at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64, sample_rate_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz / sample_rate_hz;
        let z_inv = Complex64::from_polar(1.0, -w);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(z_inv))
            .norm()
    }

    fn initial_states(&self) -> Vec<[f64; 2]> {
        let mut scale = 1.0;
        self.sections
            .iter()
            .map(|s| {
                let zi = s.step_state();
                let out = [zi[0] * scale, zi[1] * scale];
                scale *= s.dc_gain();
                out
            })
            .collect()
    }

    /// Causal filtering with per-section initial states scaled by `x[0]`.
    fn run(&self, x: &mut [f64], zi: &[[f64; 2]]) {
        let x0 = x.first().copied().unwrap_or(0.0);
        for (s, z) in self.sections.iter().zip(zi) {
            let [b0, b1, b2] = s.b;
            let [_, a1, a2] = s.a;
            let mut z0 = z[0] * x0;
            let mut z1 = z[1] * x0;
            for v in x.iter_mut() {
                let xin = *v;
                let y = b0 * xin + z0;
                z0 = b1 * xin - a1 * y + z1;
                z1 = b2 * xin - a2 * y;
                *v = y;
            }
        }
    }

    /// Samples for the slowest pole to decay by 1e-4; used as reflection
    /// padding so edge transients stay out of the returned signal.
    pub fn settle_samples(&self) -> usize {
        let r = self
            .sections
            .iter()
            .map(|s| {
                let (a1, a2) = (s.a[1], s.a[2]);
                let disc = a1 * a1 - 4.0 * a2;
                if disc < 0.0 {
                    a2.sqrt()
                } else {
                    let q = disc.sqrt();
                    ((-a1 + q) / 2.0).abs().max(((-a1 - q) / 2.0).abs())
                }
            })
            .fold(0.0_f64, f64::max);
        if r <= 0.0 || r >= 1.0 {
            return 0;
        }
        (1e-4_f64.ln() / r.ln()).ceil() as usize
    }

    /// Zero-phase filtering: odd-reflection padding, forward pass, backward
    /// pass, each started from the steady-state response to the edge value.
    pub fn filtfilt(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = x.len();
        let min = 3 * self.order();
        if n < min.max(2) {
            return Err(Error::Length { len: n, min });
        }
        let padlen = (3 * (2 * self.sections.len() + 1)).max(self.settle_samples()).min(n - 1);
        let mut ext = Vec::with_capacity(n + 2 * padlen);
        let (first, last) = (x[0], x[n - 1]);
        ext.extend((1..=padlen).rev().map(|i| 2.0 * first - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=padlen).map(|i| 2.0 * last - x[n - 1 - i]));

        let zi = self.initial_states();
        self.run(&mut ext, &zi);
        ext.reverse();
        self.run(&mut ext, &zi);
        ext.reverse();
        Ok(ext[padlen..padlen + n].to_vec())
    }
}

/// Designs a Butterworth band-pass of prototype order `order` (even) via
/// pre-warped analog low-pass → band-pass transformation and the bilinear
/// transform. Each section carries one conjugate pole pair and zeros at
/// z = ±1.
pub fn butter_bandpass(order: usize, band: &FrequencyBand, sample_rate_hz: f64) -> Result<SosFilter> {
    if order == 0 || order % 2 != 0 {
        return Err(Error::Parameter(format!("filter order must be even and positive, got {order}")));
    }
    if !(sample_rate_hz > 0.0) {
        return Err(Error::Parameter(format!("sample rate must be positive, got {sample_rate_hz}")));
    }
    band.validate(sample_rate_hz)?;

    let fs2 = 2.0 * sample_rate_hz;
    let warp = |f: f64| fs2 * (PI * f / sample_rate_hz).tan();
    let (wl, wh) = (warp(band.low_hz), warp(band.high_hz));
    let bw = wh - wl;
    let w0_sq = wl * wh;

    // Upper-half-plane prototype poles; their conjugates yield the
    // conjugate partners of every section.
    let mut analog_poles = Vec::with_capacity(order);
    for k in 0..order / 2 {
        let theta = PI * (2 * k + order + 1) as f64 / (2 * order) as f64;
        let p = Complex64::from_polar(1.0, theta);
        let t = p * (bw / 2.0);
        let d = (t * t - w0_sq).sqrt();
        analog_poles.push(t + d);
        analog_poles.push(t - d);
    }

    // Overall gain: bw^N · fs2^N / Π(fs2 - p) over all 2N analog poles.
    let mut denom = Complex64::new(1.0, 0.0);
    for p in &analog_poles {
        denom *= (fs2 - p) * (fs2 - p.conj());
    }
    let gain = (bw * fs2).powi(order as i32) / denom.re;

    let mut sections: Vec<Biquad> = analog_poles
        .iter()
        .map(|&p| {
            let z = (fs2 + p) / (fs2 - p);
            Biquad {
                b: [1.0, 0.0, -1.0],
                a: [1.0, -2.0 * z.re, z.norm_sqr()],
            }
        })
        .collect();
    for b in sections[0].b.iter_mut() {
        *b *= gain;
    }
    Ok(SosFilter { sections })
}

/// Zero-phase band-pass of `signal` with the default Butterworth design.
pub fn bandpass(signal: &[f64], band: &FrequencyBand, sample_rate_hz: f64) -> Result<Vec<f64>> {
    let filter = butter_bandpass(DEFAULT_ORDER, band, sample_rate_hz)?;
    filter.filtfilt(signal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::Band;

    const FS: f64 = 500.0;

    fn tone(freq: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| (2.0 * PI * freq * i as f64 / FS).sin()).collect()
    }

    fn central(x: &[f64], frac: f64) -> &[f64] {
        let skip = ((1.0 - frac) / 2.0 * x.len() as f64) as usize;
        &x[skip..x.len() - skip]
    }

    fn rms(x: &[f64]) -> f64 {
        (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
    }

    // Reference magnitudes from scipy.signal.butter(4, band, 'band', fs=500)
    // evaluated with sosfreqz at 5, 10, 20 and 40 Hz.
    #[test]
    fn magnitude_matches_reference_design() {
        let cases: [(Band, [f64; 4]); 3] = [
            (Band::Alpha, [0.00481593358806, 0.9999955216542, 0.009212010948068, 0.0001971784078831]),
            (Band::Gamma, [1.812134235512e-05, 0.0003549812786262, 0.0144781553962, 0.9999999902506]),
            (Band::Theta, [0.9998868295467, 0.118606936502, 0.002192407734028, 9.978945118499e-05]),
        ];
        for (band, expected) in cases {
            let f = butter_bandpass(4, &band.range(), FS).unwrap();
            assert_eq!(f.order(), 8);
            for (freq, want) in [5.0, 10.0, 20.0, 40.0].into_iter().zip(expected) {
                let got = f.magnitude(freq, FS);
                assert!(
                    (got - want).abs() <= 1e-6 * want.max(1e-3),
                    "{band} at {freq} Hz: {got} vs {want}"
                );
            }
        }
    }

    // Denominators of scipy's sections for the alpha band, as (a1, a2).
    #[test]
    fn poles_match_reference_design() {
        let mut want: [(f64, f64); 4] = [
            (-1.924956048217452, 0.9449786825002289),
            (-1.9387894309652072, 0.9531959396745322),
            (-1.9490147381655354, 0.9745128227956945),
            (-1.9710531837715521, 0.9827047510570497),
        ];
        let f = butter_bandpass(4, &Band::Alpha.range(), FS).unwrap();
        let mut got: Vec<(f64, f64)> = f.sections.iter().map(|s| (s.a[1], s.a[2])).collect();
        got.sort_by(|x, y| x.1.total_cmp(&y.1));
        want.sort_by(|x, y| x.1.total_cmp(&y.1));
        for (g, w) in got.iter().zip(want) {
            assert!((g.0 - w.0).abs() < 1e-10 && (g.1 - w.1).abs() < 1e-10, "{g:?} vs {w:?}");
        }
    }

    #[test]
    fn in_band_tone_passes() {
        let x = tone(10.0, 2500);
        let y = bandpass(&x, &Band::Alpha.range(), FS).unwrap();
        assert_eq!(y.len(), x.len());
        let c = central(&y, 0.9);
        let peak = c.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        assert!((peak - 1.0).abs() <= 0.05, "peak {peak}");
        assert!((rms(c) * 2f64.sqrt() - 1.0).abs() <= 0.05);
    }

    #[test]
    fn out_of_band_tone_is_rejected() {
        let x = tone(10.0, 2500);
        let y = bandpass(&x, &Band::Gamma.range(), FS).unwrap();
        assert!(rms(central(&y, 0.9)) <= 0.05);
    }

    #[test]
    fn dc_is_removed_by_every_band() {
        let x = vec![3.7; 3000];
        for band in Band::ALL {
            let y = bandpass(&x, &band.range(), FS).unwrap();
            assert!(rms(central(&y, 0.9)) <= 1e-3, "{band}");
        }
    }

    #[test]
    fn short_signal_is_a_length_error() {
        let err = bandpass(&[1.0; 10], &Band::Alpha.range(), FS).unwrap_err();
        assert!(matches!(err, Error::Length { len: 10, min: 24 }));
    }

    #[test]
    fn edge_at_nyquist_is_a_parameter_error() {
        let band = FrequencyBand {
            name: "x".into(),
            low_hz: 10.0,
            high_hz: 250.0,
        };
        assert!(matches!(bandpass(&[0.0; 100], &band, FS), Err(Error::Parameter(_))));
    }
}
