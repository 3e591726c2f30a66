//! Bayes-optimal accuracy for synthetic specs.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::synth::{Gaussian, SynthSpec};
use crate::dsp::Band;
use crate::error::{Error, Result};
use crate::seed::rng_for;
use crate::seed_path;

/// Sentence-level quantity whose class-conditional law is set by the generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthFeature {
    OmissionRate,
    ReadingTime,
    /// Mixed over subject offsets and clamping; no closed Gaussian law.
    EegBandMean(Band),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleEstimate {
    pub accuracy: f64,
    /// Zero for numeric integration, Monte Carlo standard error otherwise.
    pub std_error: f64,
}

pub const MC_DRAWS: usize = 1_000_000;
const GRID_POINTS: usize = 200_000;

fn law(spec: &SynthSpec, f: SynthFeature) -> Result<(Gaussian, Gaussian)> {
    match f {
        SynthFeature::OmissionRate => Ok((spec.nr.omission_rate, spec.tsr.omission_rate)),
        SynthFeature::ReadingTime => Ok((spec.nr.reading_time_s, spec.tsr.reading_time_s)),
        SynthFeature::EegBandMean(b) => Err(Error::Unsupported(format!(
            "no Gaussian class-conditional law for the {b} channel mean"
        ))),
    }
}

fn log_pdf(g: &Gaussian, x: f64) -> f64 {
    let z = (x - g.mean) / g.std;
    -0.5 * z * z - g.std.ln()
}

/// Equal-prior Bayes accuracy for classifying NR vs TSR from `features`.
///
/// One feature: `0.5 ∫ max(p_nr, p_tsr)` on a uniform grid spanning both
/// densities to ±12 std (step ≤ 1e-5 of the range). Several features
/// (drawn independently by the generator): Monte Carlo with [`MC_DRAWS`]
/// draws of the likelihood-ratio rule.
pub fn bayes_oracle(spec: &SynthSpec, features: &[SynthFeature]) -> Result<OracleEstimate> {
    spec.validate()?;
    let laws = features.iter().map(|&f| law(spec, f)).collect::<Result<Vec<_>>>()?;
    match laws.as_slice() {
        [] => Err(Error::Parameter("bayes_oracle needs at least one feature".into())),
        [(p, q)] => Ok(OracleEstimate {
            accuracy: grid_accuracy(p, q),
            std_error: 0.0,
        }),
        _ => Ok(monte_carlo(&laws)),
    }
}

fn grid_accuracy(p: &Gaussian, q: &Gaussian) -> f64 {
    let lo = (p.mean - 12.0 * p.std).min(q.mean - 12.0 * q.std);
    let hi = (p.mean + 12.0 * p.std).max(q.mean + 12.0 * q.std);
    let h = (hi - lo) / GRID_POINTS as f64;
    let density = |g: &Gaussian, x: f64| log_pdf(g, x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    // Composite Simpson.
    let f = |i: usize| {
        let x = lo + i as f64 * h;
        density(p, x).max(density(q, x))
    };
    let mut s = f(0) + f(GRID_POINTS);
    for i in 1..GRID_POINTS {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i);
    }
    0.5 * s * h / 3.0
}

fn monte_carlo(laws: &[(Gaussian, Gaussian)]) -> OracleEstimate {
    let mut rng = rng_for(0, seed_path!["bayes-oracle"]);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut correct = 0usize;
    for _ in 0..MC_DRAWS {
        let tsr = rng.random_bool(0.5);
        let mut llr = 0.0;
        for (p, q) in laws {
            let g = if tsr { q } else { p };
            let x = g.mean + g.std * unit.sample(&mut rng);
            llr += log_pdf(q, x) - log_pdf(p, x);
        }
        if (llr > 0.0) == tsr {
            correct += 1;
        }
    }
    let a = correct as f64 / MC_DRAWS as f64;
    OracleEstimate {
        accuracy: a,
        std_error: (a * (1.0 - a) / MC_DRAWS as f64).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Normal as StNormal};

    fn spec_1d(nr: Gaussian, tsr: Gaussian) -> SynthSpec {
        let mut s = SynthSpec::default();
        s.nr.omission_rate = nr;
        s.tsr.omission_rate = tsr;
        s
    }

    // Independent closed form: the Bayes rule switches at the roots of
    // log p = log q; accuracy is 0.5·Σ over intervals of the larger CDF mass.
    fn closed_form(p: Gaussian, q: Gaussian) -> f64 {
        let (a, b) = (StNormal::new(p.mean, p.std).unwrap(), StNormal::new(q.mean, q.std).unwrap());
        let qa = 1.0 / (2.0 * q.std.powi(2)) - 1.0 / (2.0 * p.std.powi(2));
        let qb = p.mean / p.std.powi(2) - q.mean / q.std.powi(2);
        let qc = q.mean.powi(2) / (2.0 * q.std.powi(2)) - p.mean.powi(2) / (2.0 * p.std.powi(2)) + (q.std / p.std).ln();
        let mut roots = if qa.abs() < 1e-15 {
            vec![-qc / qb]
        } else {
            let d = (qb * qb - 4.0 * qa * qc).sqrt();
            vec![(-qb - d) / (2.0 * qa), (-qb + d) / (2.0 * qa)]
        };
        roots.sort_by(f64::total_cmp);
        let mut edges = vec![f64::NEG_INFINITY];
        edges.extend(roots);
        edges.push(f64::INFINITY);
        let mut acc = 0.0;
        for w in edges.windows(2) {
            let mid = if w[0].is_infinite() { w[1] - 1.0 } else if w[1].is_infinite() { w[0] + 1.0 } else { 0.5 * (w[0] + w[1]) };
            let d = if log_pdf(&p, mid) >= log_pdf(&q, mid) { &a } else { &b };
            acc += d.cdf(w[1]) - d.cdf(w[0]);
        }
        0.5 * acc
    }

    #[test]
    fn identical_classes_give_chance() {
        let g = Gaussian::new(0.3, 0.1);
        let est = bayes_oracle(&spec_1d(g, g), &[SynthFeature::OmissionRate]).unwrap();
        assert!((est.accuracy - 0.5).abs() < 1e-9);
    }

    #[test]
    fn well_separated_classes_give_one() {
        let est = bayes_oracle(
            &spec_1d(Gaussian::new(0.0, 1.0), Gaussian::new(10.0, 1.0)),
            &[SynthFeature::OmissionRate],
        )
        .unwrap();
        assert!((est.accuracy - 1.0).abs() < 1e-6);
    }

    #[test]
    fn default_omission_law_matches_frozen_value_and_closed_form() {
        let spec = SynthSpec::default();
        let est = bayes_oracle(&spec, &[SynthFeature::OmissionRate]).unwrap();
        assert!((est.accuracy - 0.775352544701).abs() < 1e-9, "{}", est.accuracy);
        let cf = closed_form(spec.nr.omission_rate, spec.tsr.omission_rate);
        assert!((est.accuracy - cf).abs() < 1e-9);
    }

    #[test]
    fn grid_agrees_with_closed_form_on_assorted_laws() {
        for (p, q) in [
            (Gaussian::new(0.0, 1.0), Gaussian::new(1.0, 1.0)),
            (Gaussian::new(0.0, 1.0), Gaussian::new(0.5, 3.0)),
            (Gaussian::new(7.3, 2.5), Gaussian::new(4.2, 1.5)),
        ] {
            let est = bayes_oracle(&spec_1d(p, q), &[SynthFeature::OmissionRate]).unwrap();
            assert!((est.accuracy - closed_form(p, q)).abs() < 1e-8);
        }
    }

    #[test]
    fn monte_carlo_reports_standard_error_and_exceeds_each_marginal() {
        let spec = SynthSpec::default();
        let both = bayes_oracle(&spec, &[SynthFeature::OmissionRate, SynthFeature::ReadingTime]).unwrap();
        let om = bayes_oracle(&spec, &[SynthFeature::OmissionRate]).unwrap();
        let rt = bayes_oracle(&spec, &[SynthFeature::ReadingTime]).unwrap();
        assert!(both.std_error > 0.0 && both.std_error < 1e-3);
        assert!(both.accuracy > om.accuracy.max(rt.accuracy));
        let again = bayes_oracle(&spec, &[SynthFeature::OmissionRate, SynthFeature::ReadingTime]).unwrap();
        assert_eq!(both, again);
    }

    #[test]
    fn eeg_features_are_unsupported() {
        let err = bayes_oracle(&SynthSpec::default(), &[SynthFeature::EegBandMean(Band::Gamma)]).unwrap_err();
        assert_eq!(err.kind(), "unsupported");
    }
}
