#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Primal objective `½(‖w‖² + b²) + C·Σ hinge`, bias regularized.
pub fn objective(rows: &[Vec<f64>], y: &[f64], w: &[f64], b: f64, c: f64) -> f64 {
    let reg = 0.5 * (w.iter().map(|v| v * v).sum::<f64>() + b * b);
    let loss: f64 = rows
        .iter()
        .zip(y)
        .map(|(x, &yi)| (1.0 - yi * (x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b)).max(0.0))
        .sum();
    reg + c * loss
}

/// Projected subgradient descent on the primal with step 1/t (the objective
/// is 1-strongly convex) and projection onto ‖v‖ ≤ √(2Cn). Returns the best
/// iterate seen as `(w, b, objective)`.
pub fn subgradient_oracle(rows: &[Vec<f64>], y: &[f64], c: f64, iters: usize) -> (Vec<f64>, f64, f64) {
    let d = rows[0].len();
    let n = rows.len();
    let radius = (2.0 * c * n as f64).sqrt();
    let xs: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().copied().chain([1.0]).collect()).collect();
    let mut v = vec![0.0; d + 1];
    let mut best = (v.clone(), f64::INFINITY);
    for t in 1..=iters {
        let mut g = v.clone();
        let mut loss = 0.0;
        for (x, &yi) in xs.iter().zip(y) {
            let m = yi * x.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
            if m < 1.0 {
                loss += 1.0 - m;
                for (gj, xj) in g.iter_mut().zip(x) {
                    *gj -= c * yi * xj;
                }
            }
        }
        let f = 0.5 * v.iter().map(|a| a * a).sum::<f64>() + c * loss;
        if f < best.1 {
            best = (v.clone(), f);
        }
        let eta = 1.0 / t as f64;
        for (vj, gj) in v.iter_mut().zip(&g) {
            *vj -= eta * gj;
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > radius {
            v.iter_mut().for_each(|a| *a *= radius / norm);
        }
    }
    let (v, f) = best;
    (v[..d].to_vec(), v[d], f)
}

/// Random problem: `n` samples, `d` features, noisy linear labels.
pub fn random_problem(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut rows = Vec::with_capacity(n);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() + rng.random_range(-0.5..0.5);
        // Keep both classes present.
        let label = if i == 0 { 1.0 } else if i == 1 { -1.0 } else if s > 0.0 { 1.0 } else { -1.0 };
        rows.push(x);
        y.push(label);
    }
    (rows, y)
}
