//! Feed-forward network: ReLU hidden layers, dropout after the first hidden
//! layer, one sigmoid output, binary cross-entropy, Adam.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::MlpConfig;
use super::matrix::{Matrix, RowRef};
use super::{check_training_set, sigmoid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub n_in: usize,
    pub n_out: usize,
    /// Row-major `[out][in]`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Dense {
    fn glorot(n_in: usize, n_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (n_in + n_out) as f64).sqrt();
        Dense {
            n_in,
            n_out,
            w: (0..n_in * n_out).map(|_| rng.gen_range(-limit..limit)).collect(),
            b: vec![0.0; n_out],
        }
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n_out)
            .map(|o| {
                let w = &self.w[o * self.n_in..(o + 1) * self.n_in];
                self.b[o] + w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    fn forward_row(&self, x: &RowRef) -> Vec<f64> {
        (0..self.n_out)
            .map(|o| self.b[o] + x.dot(&self.w[o * self.n_in..(o + 1) * self.n_in]))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub layers: Vec<Dense>,
    pub dropout: f64,
    pub best_epoch: usize,
    pub history: Vec<EpochLog>,
}

/// Per-sample activations kept for backpropagation.
struct Trace {
    /// Post-activation (and post-dropout) outputs of each hidden layer.
    hidden: Vec<Vec<f64>>,
    /// Pre-activation values of each hidden layer.
    pre: Vec<Vec<f64>>,
    masks: Option<Vec<f64>>,
    logit: f64,
}

fn bce_from_logit(z: f64, y: bool) -> f64 {
    let sp = if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() };
    if y {
        sp - z
    } else {
        sp
    }
}

impl Mlp {
    pub fn new(n_in: usize, cfg: &MlpConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::init(n_in, cfg, &mut rng)
    }

    fn init(n_in: usize, cfg: &MlpConfig, rng: &mut ChaCha8Rng) -> Self {
        let mut sizes = vec![n_in];
        sizes.extend(&cfg.hidden);
        sizes.push(1);
        let layers = sizes.windows(2).map(|w| Dense::glorot(w[0], w[1], rng)).collect();
        Mlp {
            layers,
            dropout: cfg.dropout,
            best_epoch: 0,
            history: Vec::new(),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(|l| l.w.len() + l.b.len()).sum()
    }

    pub fn params_flat(&self) -> Vec<f64> {
        self.layers
            .iter()
            .flat_map(|l| l.w.iter().chain(&l.b).copied())
            .collect()
    }

    pub fn set_params_flat(&mut self, p: &[f64]) {
        let mut k = 0;
        for l in &mut self.layers {
            let nw = l.w.len();
            l.w.copy_from_slice(&p[k..k + nw]);
            k += nw;
            let nb = l.b.len();
            l.b.copy_from_slice(&p[k..k + nb]);
            k += nb;
        }
    }

    fn forward(&self, x: &RowRef, mask: Option<&mut dyn FnMut() -> bool>) -> Trace {
        let mut mask = mask;
        let mut hidden: Vec<Vec<f64>> = Vec::new();
        let mut pre = Vec::new();
        let mut masks = None;
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers[..last].iter().enumerate() {
            let z = if k == 0 {
                layer.forward_row(x)
            } else {
                layer.forward(hidden.last().expect("previous layer"))
            };
            let mut h: Vec<f64> = z.iter().map(|v| v.max(0.0)).collect();
            if k == 0 && self.dropout > 0.0 {
                if let Some(draw) = mask.as_mut() {
                    let scale = 1.0 / (1.0 - self.dropout);
                    let m: Vec<f64> = (0..h.len()).map(|_| if draw() { scale } else { 0.0 }).collect();
                    h.iter_mut().zip(&m).for_each(|(v, s)| *v *= s);
                    masks = Some(m);
                }
            }
            pre.push(z);
            hidden.push(h);
        }
        let out = &self.layers[last];
        let logit = match hidden.last() {
            Some(h) => out.forward(h)[0],
            None => out.forward_row(x)[0],
        };
        Trace { hidden, pre, masks, logit }
    }

    /// Adds `scale * dLoss/dparams` for one sample into `grads` (flat layout).
    fn backward(&self, x: &RowRef, t: &Trace, y: bool, scale: f64, grads: &mut [f64]) {
        let offsets: Vec<usize> = self
            .layers
            .iter()
            .scan(0, |acc, l| {
                let o = *acc;
                *acc += l.w.len() + l.b.len();
                Some(o)
            })
            .collect();
        let mut delta = vec![(sigmoid(t.logit) - if y { 1.0 } else { 0.0 }) * scale];
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let off = offsets[k];
            let input: Option<&Vec<f64>> = if k == 0 { None } else { Some(&t.hidden[k - 1]) };
            for o in 0..layer.n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let g = &mut grads[off + o * layer.n_in..off + (o + 1) * layer.n_in];
                match input {
                    Some(h) => g.iter_mut().zip(h).for_each(|(g, v)| *g += d * v),
                    None => x.for_each(|j, v| g[j] += d * v),
                }
                grads[off + layer.w.len() + o] += d;
            }
            if k == 0 {
                break;
            }
            // Back through the previous hidden layer's activation (and dropout).
            let prev = k - 1;
            let mut next = vec![0.0; layer.n_in];
            for o in 0..layer.n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let w = &layer.w[o * layer.n_in..(o + 1) * layer.n_in];
                next.iter_mut().zip(w).for_each(|(n, w)| *n += d * w);
            }
            for (i, n) in next.iter_mut().enumerate() {
                if t.pre[prev][i] <= 0.0 {
                    *n = 0.0;
                } else if prev == 0 {
                    if let Some(m) = &t.masks {
                        *n *= m[i];
                    }
                }
            }
            delta = next;
        }
    }

    /// Mean binary cross-entropy with dropout disabled.
    pub fn loss(&self, x: &Matrix, y: &[bool]) -> f64 {
        let n = x.n_rows();
        (0..n)
            .map(|i| bce_from_logit(self.forward(&x.row(i), None).logit, y[i]))
            .sum::<f64>()
            / n as f64
    }

    /// Gradient of [`Mlp::loss`] in the flat parameter layout.
    pub fn gradient(&self, x: &Matrix, y: &[bool]) -> Vec<f64> {
        let n = x.n_rows();
        let mut g = vec![0.0; self.parameter_count()];
        for i in 0..n {
            let r = x.row(i);
            let t = self.forward(&r, None);
            self.backward(&r, &t, y[i], 1.0 / n as f64, &mut g);
        }
        g
    }

    pub fn predict_proba(&self, x: &Matrix) -> Vec<f64> {
        (0..x.n_rows())
            .map(|i| sigmoid(self.forward(&x.row(i), None).logit))
            .collect()
    }

    /// Keeps the parameters of the epoch with the lowest validation loss, or
    /// the lowest training loss when no validation set is given.
    pub fn fit(
        x: &Matrix,
        y: &[bool],
        validation: Option<(&Matrix, &[bool])>,
        cfg: &MlpConfig,
        seed: u64,
    ) -> Result<Self> {
        check_training_set(x, y)?;
        if let Some((vx, vy)) = validation {
            if vx.n_cols() != x.n_cols() || vx.n_rows() != vy.len() || vy.is_empty() {
                return Err(Error::invalid("validation set does not match the training layout"));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Self::init(x.n_cols(), cfg, &mut rng);
        let np = net.parameter_count();
        let mut params = net.params_flat();
        let (mut m, mut v) = (vec![0.0; np], vec![0.0; np]);
        let mut step = 0i32;
        let mut order: Vec<usize> = (0..x.n_rows()).collect();
        let mut best: Option<(f64, Vec<f64>, usize)> = None;
        let mut history = Vec::new();
        let keep = 1.0 - cfg.dropout;
        for epoch in 1..=cfg.epochs {
            order.shuffle(&mut rng);
            for batch in order.chunks(cfg.batch_size) {
                let mut g = vec![0.0; np];
                let scale = 1.0 / batch.len() as f64;
                for &i in batch {
                    let r = x.row(i);
                    let mut draw = || rng.gen::<f64>() < keep;
                    let t = net.forward(&r, Some(&mut draw));
                    net.backward(&r, &t, y[i], scale, &mut g);
                }
                step += 1;
                let bc1 = 1.0 - cfg.beta1.powi(step);
                let bc2 = 1.0 - cfg.beta2.powi(step);
                for k in 0..np {
                    m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
                    v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
                    params[k] -= cfg.learning_rate * (m[k] / bc1) / ((v[k] / bc2).sqrt() + cfg.epsilon);
                }
                net.set_params_flat(&params);
            }
            let train_loss = net.loss(x, y);
            let val_loss = validation.map(|(vx, vy)| net.loss(vx, vy));
            let key = val_loss.unwrap_or(train_loss);
            if best.as_ref().map_or(true, |b| key < b.0) {
                best = Some((key, params.clone(), epoch));
            }
            history.push(EpochLog { epoch, train_loss, val_loss });
        }
        let (_, p, e) = best.expect("at least one epoch");
        net.set_params_flat(&p);
        net.best_epoch = e;
        net.history = history;
        Ok(net)
    }
}
