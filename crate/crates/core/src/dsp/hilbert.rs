use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

const MIN_LEN: usize = 16;

/// Analytic signal via the frequency domain: keep DC (and Nyquist for even
/// lengths), double positive frequencies, zero negative ones.
pub fn analytic_signal(signal: &[f64]) -> Result<Vec<Complex64>> {
    let n = signal.len();
    if n < MIN_LEN {
        return Err(Error::Length { len: n, min: MIN_LEN });
    }
    if let Some(i) = signal.iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite sample at index {i}")));
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);

    let half = n / 2;
    let positive_end = if n % 2 == 0 { half } else { half + 1 };
    for v in &mut buf[1..positive_end] {
        *v *= 2.0;
    }
    for v in &mut buf[half + 1..] {
        *v = Complex64::new(0.0, 0.0);
    }

    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    for v in &mut buf {
        *v *= scale;
    }
    Ok(buf)
}

/// Magnitude of the analytic signal.
pub fn hilbert_envelope(signal: &[f64]) -> Result<Vec<f64>> {
    Ok(analytic_signal(signal)?.into_iter().map(|z| z.norm()).collect())
}
