//! Embedding, one LSTM layer and a sigmoid output unit.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Gate blocks in `w` and `b` are stacked as input, forget, output, candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParams {
    /// `vocab x embed`.
    pub embed: Matrix,
    /// `4 hidden x (embed + hidden)`.
    pub w: Matrix,
    pub b: Vec<f64>,
    pub w_out: Vec<f64>,
    /// Single output bias, kept as a vector so every tensor is a slice.
    pub b_out: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(vocab: usize, embed: usize, hidden: usize) -> Self {
        LstmParams {
            embed: Matrix::zeros(vocab, embed),
            w: Matrix::zeros(4 * hidden, embed + hidden),
            b: vec![0.0; 4 * hidden],
            w_out: vec![0.0; hidden],
            b_out: vec![0.0],
        }
    }

    /// Uniform in `[-scale, scale]`, forget-gate bias set to 1.
    pub fn init<R: Rng>(vocab: usize, embed: usize, hidden: usize, scale: f64, rng: &mut R) -> Self {
        let mut p = Self::zeros(vocab, embed, hidden);
        for t in p.tensors_mut() {
            for v in t.iter_mut() {
                *v = rng.random_range(-scale..=scale);
            }
        }
        for v in &mut p.b[hidden..2 * hidden] {
            *v = 1.0;
        }
        p
    }

    pub fn hidden(&self) -> usize {
        self.w_out.len()
    }

    pub fn embed_dim(&self) -> usize {
        self.embed.cols()
    }

    pub fn vocab(&self) -> usize {
        self.embed.rows()
    }

    pub fn tensor_names() -> [&'static str; 5] {
        ["embed", "w", "b", "w_out", "b_out"]
    }

    pub fn tensors(&self) -> [&[f64]; 5] {
        [self.embed.as_slice(), self.w.as_slice(), &self.b, &self.w_out, &self.b_out]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 5] {
        [
            self.embed.as_mut_slice(),
            self.w.as_mut_slice(),
            &mut self.b,
            &mut self.w_out,
            &mut self.b_out,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.vocab(), self.embed_dim(), self.hidden())
    }

    /// `self += other * scale`.
    pub fn add_scaled(&mut self, other: &LstmParams, scale: f64) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += scale * y;
            }
        }
    }
}

/// Activations of one forward pass.
#[derive(Debug, Clone)]
pub struct Cache {
    pub inputs: Vec<usize>,
    /// `[embedding; h_{t-1}]` per step.
    pub z: Vec<Vec<f64>>,
    /// Activated gates `[i, f, o, g]` per step.
    pub gates: Vec<Vec<f64>>,
    /// Cell states `c_0 .. c_T` (`c_0 = 0`).
    pub c: Vec<Vec<f64>>,
    /// Hidden states `h_0 .. h_T` (`h_0 = 0`).
    pub h: Vec<Vec<f64>>,
    pub p: f64,
}

pub fn forward(params: &LstmParams, inputs: &[usize]) -> Cache {
    let hd = params.hidden();
    let ed = params.embed_dim();
    let mut cache = Cache {
        inputs: inputs.to_vec(),
        z: Vec::with_capacity(inputs.len()),
        gates: Vec::with_capacity(inputs.len()),
        c: vec![vec![0.0; hd]],
        h: vec![vec![0.0; hd]],
        p: 0.0,
    };
    for &x in inputs {
        let mut z = Vec::with_capacity(ed + hd);
        z.extend_from_slice(params.embed.row(x));
        z.extend_from_slice(cache.h.last().unwrap());
        let mut a: Vec<f64> = (0..4 * hd)
            .map(|r| params.b[r] + crate::linalg::dot(params.w.row(r), &z))
            .collect();
        for v in &mut a[..3 * hd] {
            *v = sigmoid(*v);
        }
        for v in &mut a[3 * hd..] {
            *v = v.tanh();
        }
        let c_prev = cache.c.last().unwrap();
        let c: Vec<f64> = (0..hd).map(|j| a[hd + j] * c_prev[j] + a[j] * a[3 * hd + j]).collect();
        let h: Vec<f64> = (0..hd).map(|j| a[2 * hd + j] * c[j].tanh()).collect();
        cache.z.push(z);
        cache.gates.push(a);
        cache.c.push(c);
        cache.h.push(h);
    }
    let logit = params.b_out[0] + crate::linalg::dot(&params.w_out, cache.h.last().unwrap());
    cache.p = sigmoid(logit);
    cache
}

/// Binary cross-entropy for a target in `{0, 1}`.
pub fn bce(p: f64, target: f64) -> f64 {
    let p = p.clamp(1e-15, 1.0 - 1e-15);
    -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
}

pub fn loss(params: &LstmParams, inputs: &[usize], target: f64) -> f64 {
    bce(forward(params, inputs).p, target)
}

/// Gradient of [`bce`] with respect to every parameter, by backpropagation
/// through all timesteps.
pub fn backward(params: &LstmParams, cache: &Cache, target: f64) -> LstmParams {
    let hd = params.hidden();
    let ed = params.embed_dim();
    let steps = cache.inputs.len();
    let mut g = params.zeros_like();
    let dlogit = cache.p - target;
    g.b_out[0] = dlogit;
    let h_last = &cache.h[steps];
    for j in 0..hd {
        g.w_out[j] = dlogit * h_last[j];
    }
    let mut dh: Vec<f64> = params.w_out.iter().map(|w| dlogit * w).collect();
    let mut dc = vec![0.0; hd];
    let mut da = vec![0.0; 4 * hd];
    for t in (0..steps).rev() {
        let gates = &cache.gates[t];
        let c = &cache.c[t + 1];
        let c_prev = &cache.c[t];
        for j in 0..hd {
            let (i, f, o, gg) = (gates[j], gates[hd + j], gates[2 * hd + j], gates[3 * hd + j]);
            let tc = c[j].tanh();
            dc[j] += dh[j] * o * (1.0 - tc * tc);
            let d_o = dh[j] * tc;
            let d_i = dc[j] * gg;
            let d_g = dc[j] * i;
            let d_f = dc[j] * c_prev[j];
            da[j] = d_i * i * (1.0 - i);
            da[hd + j] = d_f * f * (1.0 - f);
            da[2 * hd + j] = d_o * o * (1.0 - o);
            da[3 * hd + j] = d_g * (1.0 - gg * gg);
            dc[j] *= f;
        }
        let z = &cache.z[t];
        let mut dz = vec![0.0; ed + hd];
        for (r, &dar) in da.iter().enumerate() {
            g.b[r] += dar;
            let w_row = params.w.row(r);
            let gw = g.w.row_mut(r);
            for k in 0..ed + hd {
                gw[k] += dar * z[k];
                dz[k] += dar * w_row[k];
            }
        }
        let ge = g.embed.row_mut(cache.inputs[t]);
        for k in 0..ed {
            ge[k] += dz[k];
        }
        dh.copy_from_slice(&dz[ed..]);
    }
    g
}

/// Largest relative error between [`backward`] and a five-point central
/// difference with step `h`, one entry per tensor. The denominator is floored
/// at `1e-8`.
pub fn gradient_check(params: &LstmParams, inputs: &[usize], target: f64, h: f64) -> [f64; 5] {
    let analytic = backward(params, &forward(params, inputs), target);
    let mut worst = [0.0; 5];
    let mut probe = params.clone();
    for k in 0..5 {
        let n = params.tensors()[k].len();
        for idx in 0..n {
            let orig = params.tensors()[k][idx];
            let mut at = |offset: f64| {
                probe.tensors_mut()[k][idx] = orig + offset;
                loss(&probe, inputs, target)
            };
            let numeric = (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h);
            probe.tensors_mut()[k][idx] = orig;
            let a = analytic.tensors()[k][idx];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            worst[k] = f64::max(worst[k], rel);
        }
    }
    worst
}
