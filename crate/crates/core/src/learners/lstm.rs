//! Bidirectional LSTM sequence classifier.
//!
//! Forward and backward LSTMs read the valid steps of a sequence; the last
//! forward state and the final backward state (at step 0) are concatenated,
//! passed through a tanh dense layer and a linear output layer, and trained
//! with softmax cross-entropy and Adam. Parameters live in one flat vector.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scaler::{fit_scaler_rows, ScalerParams};
use super::SequenceDataset;
use crate::error::{Error, Result};
use crate::seed::rng_for;
use crate::seed_path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LstmShape {
    pub input: usize,
    pub hidden: usize,
    pub dense: usize,
    pub classes: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LstmHyper {
    pub hidden: usize,
    pub dense: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub min_delta: f64,
    pub validation_fraction: f64,
}

impl Default for LstmHyper {
    fn default() -> Self {
        LstmHyper {
            hidden: 64,
            dense: 64,
            learning_rate: 0.001,
            batch_size: 40,
            max_epochs: 200,
            patience: 104,
            min_delta: 1e-7,
            validation_fraction: 0.1,
        }
    }
}

/// Offsets of each parameter block in the flat vector.
#[derive(Debug, Clone, Copy)]
struct Layout {
    dir: [usize; 2],
    dense_w: usize,
    dense_b: usize,
    out_w: usize,
    out_b: usize,
    total: usize,
}

impl LstmShape {
    fn dir_len(&self) -> usize {
        4 * self.hidden * (self.input + self.hidden + 1)
    }

    fn layout(&self) -> Layout {
        let d = self.dir_len();
        let dense_w = 2 * d;
        let dense_b = dense_w + self.dense * 2 * self.hidden;
        let out_w = dense_b + self.dense;
        let out_b = out_w + self.classes * self.dense;
        Layout {
            dir: [0, d],
            dense_w,
            dense_b,
            out_w,
            out_b,
            total: out_b + self.classes,
        }
    }

    pub fn n_params(&self) -> usize {
        self.layout().total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiLstmModel {
    pub shape: LstmShape,
    pub params: Vec<f64>,
    /// Per-feature input scaling fit on training timesteps.
    pub scaler: Option<ScalerParams>,
    pub label_names: Vec<String>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Per-step cache of one direction.
struct DirCache {
    xs: Vec<usize>,
    h: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    gates: Vec<[Vec<f64>; 4]>,
}

struct Cache {
    dirs: [DirCache; 2],
    feat: Vec<f64>,
    dense: Vec<f64>,
}

/// Runs one direction over `steps` (indices into `x`).
fn run_dir(p: &[f64], shape: &LstmShape, off: usize, x: &[Vec<f64>], steps: Vec<usize>) -> DirCache {
    let (d, h) = (shape.input, shape.hidden);
    let w = &p[off..off + 4 * h * d];
    let u = &p[off + 4 * h * d..off + 4 * h * (d + h)];
    let b = &p[off + 4 * h * (d + h)..off + 4 * h * (d + h + 1)];
    let mut hs = vec![vec![0.0; h]];
    let mut cs = vec![vec![0.0; h]];
    let mut gates = Vec::with_capacity(steps.len());
    let mut z = vec![0.0; 4 * h];
    for &t in &steps {
        let xt = &x[t];
        let hp = hs.last().expect("initial state");
        for r in 0..4 * h {
            let wr = &w[r * d..(r + 1) * d];
            let ur = &u[r * h..(r + 1) * h];
            let mut s = b[r];
            for k in 0..d {
                s += wr[k] * xt[k];
            }
            for k in 0..h {
                s += ur[k] * hp[k];
            }
            z[r] = s;
        }
        let i: Vec<f64> = z[0..h].iter().map(|&v| sigmoid(v)).collect();
        let f: Vec<f64> = z[h..2 * h].iter().map(|&v| sigmoid(v)).collect();
        let g: Vec<f64> = z[2 * h..3 * h].iter().map(|&v| v.tanh()).collect();
        let o: Vec<f64> = z[3 * h..4 * h].iter().map(|&v| sigmoid(v)).collect();
        let cp = cs.last().expect("initial state");
        let c: Vec<f64> = (0..h).map(|k| f[k] * cp[k] + i[k] * g[k]).collect();
        let hn: Vec<f64> = (0..h).map(|k| o[k] * c[k].tanh()).collect();
        cs.push(c);
        hs.push(hn);
        gates.push([i, f, g, o]);
    }
    DirCache { xs: steps, h: hs, c: cs, gates }
}

fn forward(p: &[f64], shape: &LstmShape, x: &[Vec<f64>], len: usize) -> (Vec<f64>, Cache) {
    let lay = shape.layout();
    let h = shape.hidden;
    let fwd = run_dir(p, shape, lay.dir[0], x, (0..len).collect());
    let bwd = run_dir(p, shape, lay.dir[1], x, (0..len).rev().collect());
    let mut feat = Vec::with_capacity(2 * h);
    feat.extend_from_slice(fwd.h.last().expect("state"));
    feat.extend_from_slice(bwd.h.last().expect("state"));
    let dense: Vec<f64> = (0..shape.dense)
        .map(|j| {
            let row = &p[lay.dense_w + j * 2 * h..lay.dense_w + (j + 1) * 2 * h];
            (p[lay.dense_b + j] + row.iter().zip(&feat).map(|(a, b)| a * b).sum::<f64>()).tanh()
        })
        .collect();
    let logits = (0..shape.classes)
        .map(|c| {
            let row = &p[lay.out_w + c * shape.dense..lay.out_w + (c + 1) * shape.dense];
            p[lay.out_b + c] + row.iter().zip(&dense).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect();
    (
        logits,
        Cache {
            dirs: [fwd, bwd],
            feat,
            dense,
        },
    )
}

fn backward_dir(p: &[f64], shape: &LstmShape, off: usize, x: &[Vec<f64>], cache: &DirCache, dh_last: &[f64], grad: &mut [f64]) {
    let (d, h) = (shape.input, shape.hidden);
    let u = &p[off + 4 * h * d..off + 4 * h * (d + h)];
    let (gw, rest) = grad[off..off + 4 * h * (d + h + 1)].split_at_mut(4 * h * d);
    let (gu, gb) = rest.split_at_mut(4 * h * h);
    let mut dh = dh_last.to_vec();
    let mut dc = vec![0.0; h];
    let mut dz = vec![0.0; 4 * h];
    for s in (0..cache.xs.len()).rev() {
        let [i, f, g, o] = &cache.gates[s];
        let c = &cache.c[s + 1];
        let cp = &cache.c[s];
        let hp = &cache.h[s];
        let xt = &x[cache.xs[s]];
        for k in 0..h {
            let tc = c[k].tanh();
            let dck = dc[k] + dh[k] * o[k] * (1.0 - tc * tc);
            dz[k] = dck * g[k] * i[k] * (1.0 - i[k]);
            dz[h + k] = dck * cp[k] * f[k] * (1.0 - f[k]);
            dz[2 * h + k] = dck * i[k] * (1.0 - g[k] * g[k]);
            dz[3 * h + k] = dh[k] * tc * o[k] * (1.0 - o[k]);
            dc[k] = dck * f[k];
        }
        dh.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..4 * h {
            let z = dz[r];
            if z == 0.0 {
                continue;
            }
            gb[r] += z;
            let gwr = &mut gw[r * d..(r + 1) * d];
            for k in 0..d {
                gwr[k] += z * xt[k];
            }
            let gur = &mut gu[r * h..(r + 1) * h];
            let ur = &u[r * h..(r + 1) * h];
            for k in 0..h {
                gur[k] += z * hp[k];
                dh[k] += z * ur[k];
            }
        }
    }
}

/// Adds d(loss)/d(params) for one sample to `grad`; returns the loss.
fn sample_grad(p: &[f64], shape: &LstmShape, x: &[Vec<f64>], len: usize, label: usize, grad: &mut [f64]) -> f64 {
    let lay = shape.layout();
    let h = shape.hidden;
    let (logits, cache) = forward(p, shape, x, len);
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    let loss = -(exps[label] / z).ln();
    let dlogits: Vec<f64> = exps
        .iter()
        .enumerate()
        .map(|(c, e)| e / z - if c == label { 1.0 } else { 0.0 })
        .collect();
    let mut ddense = vec![0.0; shape.dense];
    for (c, &dl) in dlogits.iter().enumerate() {
        grad[lay.out_b + c] += dl;
        for j in 0..shape.dense {
            grad[lay.out_w + c * shape.dense + j] += dl * cache.dense[j];
            ddense[j] += dl * p[lay.out_w + c * shape.dense + j];
        }
    }
    let mut dfeat = vec![0.0; 2 * h];
    for j in 0..shape.dense {
        let da = ddense[j] * (1.0 - cache.dense[j] * cache.dense[j]);
        grad[lay.dense_b + j] += da;
        for k in 0..2 * h {
            grad[lay.dense_w + j * 2 * h + k] += da * cache.feat[k];
            dfeat[k] += da * p[lay.dense_w + j * 2 * h + k];
        }
    }
    backward_dir(p, shape, lay.dir[0], x, &cache.dirs[0], &dfeat[..h], grad);
    backward_dir(p, shape, lay.dir[1], x, &cache.dirs[1], &dfeat[h..], grad);
    loss
}

/// Mean loss and gradient over `batch` (indices into `xs`). Samples are
/// grouped in fixed-size chunks whose partial sums are added in order, so
/// the result does not depend on the thread count.
fn batch_grad(p: &[f64], shape: &LstmShape, xs: &[Vec<Vec<f64>>], ys: &[usize], batch: &[usize]) -> (f64, Vec<f64>) {
    const CHUNK: usize = 4;
    let n = shape.n_params();
    let partial: Vec<(f64, Vec<f64>)> = batch
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut g = vec![0.0; n];
            let mut loss = 0.0;
            for &i in chunk {
                loss += sample_grad(p, shape, &xs[i], xs[i].len(), ys[i], &mut g);
            }
            (loss, g)
        })
        .collect();
    let mut grad = vec![0.0; n];
    let mut loss = 0.0;
    for (l, g) in partial {
        loss += l;
        grad.iter_mut().zip(g).for_each(|(a, b)| *a += b);
    }
    let k = batch.len() as f64;
    grad.iter_mut().for_each(|v| *v /= k);
    (loss / k, grad)
}

fn init_params(shape: &LstmShape, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let lay = shape.layout();
    let h = shape.hidden;
    let mut p = vec![0.0; lay.total];
    let mut fill = |range: std::ops::Range<usize>, limit: f64, rng: &mut ChaCha8Rng| {
        for v in &mut p[range] {
            *v = rng.random_range(-limit..limit);
        }
    };
    for off in lay.dir {
        let (d, h4) = (shape.input, 4 * h);
        fill(off..off + h4 * d, (6.0 / (d + h4) as f64).sqrt(), rng);
        fill(off + h4 * d..off + h4 * (d + h), (6.0 / (h + h4) as f64).sqrt(), rng);
    }
    fill(lay.dense_w..lay.dense_b, (6.0 / (2 * h + shape.dense) as f64).sqrt(), rng);
    fill(lay.out_w..lay.out_b, (6.0 / (shape.dense + shape.classes) as f64).sqrt(), rng);
    // Forget-gate bias starts at 1.
    for off in lay.dir {
        let b = off + 4 * h * (shape.input + h);
        p[b + h..b + 2 * h].iter_mut().for_each(|v| *v = 1.0);
    }
    p
}

impl BiLstmModel {
    pub fn new(shape: LstmShape, label_names: Vec<String>, seed: u64) -> Self {
        let mut rng = rng_for(seed, seed_path!["lstm-init"]);
        BiLstmModel {
            shape,
            params: init_params(&shape, &mut rng),
            scaler: None,
            label_names,
        }
    }

    fn scaled(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        match &self.scaler {
            Some(s) => x.iter().map(|v| s.transform(v)).collect(),
            None => x.to_vec(),
        }
    }

    /// Logits for the first `len` steps of `x`; later steps are ignored.
    pub fn logits(&self, x: &[Vec<f64>], len: usize) -> Result<Vec<f64>> {
        if len == 0 || len > x.len() {
            return Err(Error::Range(format!("valid length {len} for a sequence of {} steps", x.len())));
        }
        if let Some(v) = x[..len].iter().find(|v| v.len() != self.shape.input) {
            return Err(Error::Dimension {
                expected: self.shape.input,
                got: v.len(),
            });
        }
        Ok(forward(&self.params, &self.shape, &self.scaled(&x[..len]), len).0)
    }

    /// Argmax of the logits; ties go to the smaller label id.
    pub fn predict_one(&self, x: &[Vec<f64>]) -> Result<usize> {
        let l = self.logits(x, x.len())?;
        let mut best = 0;
        for k in 1..l.len() {
            if l[k] > l[best] {
                best = k;
            }
        }
        Ok(best)
    }

    pub fn predict(&self, ds: &SequenceDataset) -> Result<Vec<usize>> {
        ds.sequences.par_iter().map(|x| self.predict_one(x)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epochs_run: usize,
    pub best_epoch: usize,
    pub best_validation_accuracy: f64,
    pub train_loss: Vec<f64>,
    pub validation_accuracy: Vec<f64>,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-7;

    fn new(n: usize, lr: f64) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, p: &mut [f64], g: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t);
        let c2 = 1.0 - Self::B2.powi(self.t);
        for k in 0..p.len() {
            self.m[k] = Self::B1 * self.m[k] + (1.0 - Self::B1) * g[k];
            self.v[k] = Self::B2 * self.v[k] + (1.0 - Self::B2) * g[k] * g[k];
            p[k] -= self.lr * (self.m[k] / c1) / ((self.v[k] / c2).sqrt() + Self::EPS);
        }
    }
}

fn accuracy(model: &BiLstmModel, xs: &[Vec<Vec<f64>>], ys: &[usize], idx: &[usize]) -> f64 {
    let correct = idx
        .par_iter()
        .filter(|&&i| {
            let l = forward(&model.params, &model.shape, &xs[i], xs[i].len()).0;
            let best = (1..l.len()).fold(0, |b, k| if l[k] > l[b] { k } else { b });
            best == ys[i]
        })
        .count();
    correct as f64 / idx.len() as f64
}

/// Trains on `train` with `hyper.validation_fraction` held out for early
/// stopping; returns the parameters with the best validation accuracy.
pub fn train_bilstm(train: &SequenceDataset, hyper: &LstmHyper, seed: u64) -> Result<(BiLstmModel, TrainingLog)> {
    train.validate()?;
    if hyper.batch_size == 0 || hyper.hidden == 0 || hyper.dense == 0 || !(hyper.learning_rate > 0.0) {
        return Err(Error::Parameter(format!("invalid LSTM hyper-parameters {hyper:?}")));
    }
    let mut rng = rng_for(seed, seed_path!["lstm-train"]);
    let n = train.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    let n_val = if n >= 2 {
        ((n as f64 * hyper.validation_fraction).round() as usize).clamp(1, n - 1)
    } else {
        0
    };
    let (val_idx, fit_idx) = idx.split_at(n_val);
    let (val_idx, fit_idx) = (val_idx.to_vec(), fit_idx.to_vec());
    let val_idx = if val_idx.is_empty() { fit_idx.clone() } else { val_idx };

    let steps: Vec<&Vec<f64>> = fit_idx.iter().flat_map(|&i| &train.sequences[i]).collect();
    let scaler = fit_scaler_rows(&steps)?;
    let xs: Vec<Vec<Vec<f64>>> = train
        .sequences
        .iter()
        .map(|s| s.iter().map(|v| scaler.transform(v)).collect())
        .collect();

    let shape = LstmShape {
        input: train.dim(),
        hidden: hyper.hidden,
        dense: hyper.dense,
        classes: train.label_names.len().max(2),
    };
    let mut model = BiLstmModel::new(shape, train.label_names.clone(), seed);
    model.scaler = Some(scaler);
    let mut adam = Adam::new(shape.n_params(), hyper.learning_rate);
    let mut log = TrainingLog {
        epochs_run: 0,
        best_epoch: 0,
        best_validation_accuracy: f64::NEG_INFINITY,
        train_loss: Vec::new(),
        validation_accuracy: Vec::new(),
    };
    let mut best = model.params.clone();
    let mut wait = 0;
    let mut order = fit_idx.clone();
    for epoch in 1..=hyper.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(hyper.batch_size) {
            let (loss, grad) = batch_grad(&model.params, &shape, &xs, &train.labels, batch);
            adam.step(&mut model.params, &grad);
            loss_sum += loss * batch.len() as f64;
        }
        let val = accuracy(&model, &xs, &train.labels, &val_idx);
        log.epochs_run = epoch;
        log.train_loss.push(loss_sum / order.len() as f64);
        log.validation_accuracy.push(val);
        if val > log.best_validation_accuracy + hyper.min_delta {
            log.best_validation_accuracy = val;
            log.best_epoch = epoch;
            best.clone_from(&model.params);
            wait = 0;
        } else {
            wait += 1;
            if wait >= hyper.patience {
                break;
            }
        }
    }
    model.params = best;
    Ok((model, log))
}

fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Largest relative error between the analytic gradient and central finite
/// differences (step 1e-5) over every parameter, on three random sequences
/// of length 3 to 5 with parameters jittered away from initialization.
pub fn gradient_check(shape: LstmShape, seed: u64) -> f64 {
    let mut rng: ChaCha8Rng = rand::SeedableRng::seed_from_u64(seed);
    let model = BiLstmModel::new(shape, vec!["a".into(), "b".into()], seed);
    let mut p = model.params.clone();
    // Move away from the initial forget bias so every gate is exercised.
    p.iter_mut().for_each(|v| *v += rng.random_range(-0.5..0.5));
    let xs: Vec<Vec<Vec<f64>>> = (0..3)
        .map(|k| (0..3 + k).map(|_| (0..shape.input).map(|_| rng.random_range(-1.0..1.0)).collect()).collect())
        .collect();
    let ys = vec![0, 1, 1];
    let batch = [0, 1, 2];
    let (_, grad) = batch_grad(&p, &shape, &xs, &ys, &batch);
    let loss = |q: &[f64]| {
        batch
            .iter()
            .map(|&i| sample_grad(q, &shape, &xs[i], xs[i].len(), ys[i], &mut vec![0.0; q.len()]))
            .sum::<f64>()
            / batch.len() as f64
    };
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for k in 0..p.len() {
        let mut q = p.clone();
        q[k] = p[k] + eps;
        let up = loss(&q);
        q[k] = p[k] - eps;
        let down = loss(&q);
        worst = worst.max(relative_error(grad[k], (up - down) / (2.0 * eps)));
    }
    worst
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::dataset::tests::group;
    use rand::SeedableRng;

    #[test]
    fn gradients_match_finite_differences() {
        let shape = LstmShape {
            input: 3,
            hidden: 2,
            dense: 3,
            classes: 2,
        };
        for seed in 0..3 {
            let e = gradient_check(shape, seed);
            assert!(e < 1e-4, "seed {seed}: {e}");
        }
    }

    #[test]
    fn padding_beyond_the_mask_is_ignored() {
        let shape = LstmShape {
            input: 2,
            hidden: 4,
            dense: 3,
            classes: 2,
        };
        let model = BiLstmModel::new(shape, vec!["a".into(), "b".into()], 1);
        let x = vec![vec![0.3, -0.2], vec![0.5, 0.9], vec![-0.7, 0.1]];
        let base = model.logits(&x, 3).unwrap();
        for pad in 1..5 {
            let mut y = x.clone();
            y.extend(std::iter::repeat_n(vec![0.0, 0.0], pad));
            assert_eq!(model.logits(&y, 3).unwrap(), base);
        }
        assert_eq!(model.logits(&x, 4).unwrap_err().kind(), "range");
        assert_eq!(model.logits(&[vec![1.0]], 1).unwrap_err().kind(), "dimension");
    }

    fn toy(n: usize, seed: u64, constant: bool) -> SequenceDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sequences = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let s: Vec<Vec<f64>> = (0..5).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
            let sum: f64 = s.iter().map(|v| v[0]).sum();
            labels.push(if constant { 1 } else { usize::from(sum > 0.0) });
            sequences.push(s);
        }
        SequenceDataset {
            set_name: "toy".into(),
            feature_names: vec!["x".into()],
            groups: (0..n).map(group).collect(),
            sequences,
            labels,
            label_names: vec!["neg".into(), "pos".into()],
        }
    }

    #[test]
    fn learns_the_sign_of_a_sum() {
        let ds = toy(200, 3, false);
        let (model, log) = train_bilstm(&ds, &LstmHyper::default(), 7).unwrap();
        assert!(log.best_validation_accuracy >= 0.95, "{log:?}");
        let pred = model.predict(&ds).unwrap();
        let acc = pred.iter().zip(&ds.labels).filter(|(a, b)| a == b).count() as f64 / ds.len() as f64;
        assert!(acc >= 0.95, "{acc}");
    }

    #[test]
    fn fits_a_constant_label() {
        let ds = toy(200, 4, true);
        let (_, log) = train_bilstm(&ds, &LstmHyper::default(), 1).unwrap();
        assert!(*log.train_loss.last().unwrap() <= 0.01, "{:?}", log.train_loss.last());
        assert!(log.train_loss.last() < log.train_loss.first());
    }

    #[test]
    fn training_is_deterministic() {
        let ds = toy(60, 5, false);
        let hyper = LstmHyper {
            hidden: 4,
            dense: 4,
            max_epochs: 5,
            ..Default::default()
        };
        let a = train_bilstm(&ds, &hyper, 2).unwrap();
        let b = train_bilstm(&ds, &hyper, 2).unwrap();
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| train_bilstm(&ds, &hyper, 2).unwrap());
        assert_eq!(a, c);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let mut ds = toy(3, 1, false);
        ds.sequences.clear();
        ds.labels.clear();
        ds.groups.clear();
        assert_eq!(train_bilstm(&ds, &LstmHyper::default(), 0).unwrap_err().kind(), "empty");
    }
}
