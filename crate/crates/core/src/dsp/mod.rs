//! Band-pass filtering, Hilbert envelopes and per-segment band power.

mod band_power;
mod butterworth;
mod hilbert;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use band_power::{channel_envelopes, segment_band_power, segment_mean, Segment};
pub use butterworth::{bandpass, butter_bandpass, Biquad, SosFilter, DEFAULT_ORDER};
pub use hilbert::{analytic_signal, hilbert_envelope};

/// Canonical EEG frequency bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Theta,
    Alpha,
    Beta,
    Gamma,
    Broadband,
}

impl Band {
    /// The four oscillatory bands, in the fixed concatenation order.
    pub const OSCILLATORY: [Band; 4] = [Band::Theta, Band::Alpha, Band::Beta, Band::Gamma];
    pub const ALL: [Band; 5] = [Band::Theta, Band::Alpha, Band::Beta, Band::Gamma, Band::Broadband];

    pub fn name(self) -> &'static str {
        match self {
            Band::Theta => "theta",
            Band::Alpha => "alpha",
            Band::Beta => "beta",
            Band::Gamma => "gamma",
            Band::Broadband => "broadband",
        }
    }

    pub fn parse(s: &str) -> Result<Band> {
        Band::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "band",
                name: s.to_string(),
                valid: Band::ALL.iter().map(|b| b.name().to_string()).collect(),
            })
    }

    pub fn range(self) -> FrequencyBand {
        let (low_hz, high_hz) = match self {
            Band::Theta => (4.0, 8.0),
            Band::Alpha => (8.5, 13.0),
            Band::Beta => (13.5, 30.0),
            Band::Gamma => (30.5, 49.5),
            Band::Broadband => (0.1, 50.0),
        };
        FrequencyBand {
            name: self.name().to_string(),
            low_hz,
            high_hz,
        }
    }

    /// Lower and upper halves of the band (`theta1`, `theta2`, ...).
    pub fn halves(self) -> [FrequencyBand; 2] {
        let r = self.range();
        let mid = 0.5 * (r.low_hz + r.high_hz);
        [
            FrequencyBand {
                name: format!("{}1", self.name()),
                low_hz: r.low_hz,
                high_hz: mid,
            },
            FrequencyBand {
                name: format!("{}2", self.name()),
                low_hz: mid,
                high_hz: r.high_hz,
            },
        ]
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyBand {
    pub name: String,
    pub low_hz: f64,
    pub high_hz: f64,
}

impl FrequencyBand {
    pub fn validate(&self, sample_rate_hz: f64) -> Result<()> {
        let nyquist = sample_rate_hz / 2.0;
        if !(self.low_hz > 0.0 && self.low_hz < self.high_hz) {
            return Err(Error::Parameter(format!(
                "band {}: need 0 < low ({}) < high ({})",
                self.name, self.low_hz, self.high_hz
            )));
        }
        if self.high_hz >= nyquist {
            return Err(Error::Parameter(format!(
                "band {}: upper edge {} Hz >= Nyquist {} Hz",
                self.name, self.high_hz, nyquist
            )));
        }
        Ok(())
    }
}

/// How the Hilbert envelope is turned into a power value.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMode {
    /// Mean envelope amplitude (µV).
    #[default]
    Amplitude,
    /// Mean squared envelope amplitude (µV²).
    AmplitudeSquared,
}

impl PowerMode {
    pub fn parse(s: &str) -> Result<PowerMode> {
        match s {
            "amplitude" => Ok(PowerMode::Amplitude),
            "amplitude_squared" => Ok(PowerMode::AmplitudeSquared),
            _ => Err(Error::UnknownName {
                kind: "power mode",
                name: s.to_string(),
                valid: vec!["amplitude".into(), "amplitude_squared".into()],
            }),
        }
    }
}

/// Per-channel band power for one band over one set of segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPowerVector {
    pub band: String,
    pub values: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_band_edges() {
        let g = Band::Gamma.range();
        assert_eq!((g.low_hz, g.high_hz), (30.5, 49.5));
        let a = Band::Alpha.range();
        assert_eq!((a.low_hz, a.high_hz), (8.5, 13.0));
        for b in Band::ALL {
            b.range().validate(500.0).unwrap();
        }
    }

    #[test]
    fn band_edge_at_nyquist_is_rejected() {
        let err = Band::Gamma.range().validate(99.0).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
    }

    #[test]
    fn halves_split_at_midpoint() {
        let [lo, hi] = Band::Theta.halves();
        assert_eq!(lo.name, "theta1");
        assert_eq!((lo.low_hz, lo.high_hz, hi.low_hz, hi.high_hz), (4.0, 6.0, 6.0, 8.0));
    }
}
