//! Character-level LSTM classifier over handles.
//!
//! Handles are lowercased, cut to their first `max_len` characters and
//! left-padded, so the last step always reads a real character. Only the
//! handle string is used; feature rows are ignored.

mod net;
mod vocab;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{Dataset, Samples};
use crate::learners::{Model, require_both_classes};

pub use net::{backward, bce, forward, gradient_check, loss, Cache, LstmParams};
pub use vocab::{CharVocab, Encoded, DEFAULT_MAX_LEN, PAD};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CharLstmParams {
    pub embed_dim: usize,
    pub hidden: usize,
    pub max_len: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for CharLstmParams {
    fn default() -> Self {
        CharLstmParams {
            embed_dim: 16,
            hidden: 30,
            max_len: DEFAULT_MAX_LEN,
            epochs: 60,
            batch_size: 16,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            init_scale: 0.08,
            seed: 0,
        }
    }
}

struct Adam {
    m: LstmParams,
    v: LstmParams,
    t: i32,
}

impl Adam {
    fn new(like: &LstmParams) -> Self {
        Adam {
            m: like.zeros_like(),
            v: like.zeros_like(),
            t: 0,
        }
    }

    fn step(&mut self, params: &mut LstmParams, grad: &LstmParams, cfg: &CharLstmParams) {
        self.t += 1;
        let bc1 = 1.0 - cfg.beta1.powi(self.t);
        let bc2 = 1.0 - cfg.beta2.powi(self.t);
        let grads = grad.tensors();
        let ms = self.m.tensors_mut();
        let vs = self.v.tensors_mut();
        for (((p, g), m), v) in params.tensors_mut().into_iter().zip(grads).zip(ms).zip(vs) {
            for k in 0..p.len() {
                m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g[k];
                v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g[k] * g[k];
                let mh = m[k] / bc1;
                let vh = v[k] / bc2;
                p[k] -= cfg.learning_rate * mh / (vh.sqrt() + cfg.epsilon);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharLstm {
    pub config: CharLstmParams,
    pub vocab: CharVocab,
    pub params: Option<LstmParams>,
    /// Mean training loss per epoch.
    #[serde(skip)]
    pub loss_history: Vec<f64>,
    /// Characters outside the vocabulary seen during training.
    #[serde(skip)]
    pub unknown_chars: usize,
}

impl CharLstm {
    pub fn new(config: CharLstmParams) -> Self {
        CharLstm {
            config,
            vocab: CharVocab::default(),
            params: None,
            loss_history: Vec::new(),
            unknown_chars: 0,
        }
    }

    fn encode(&self, handle: &str) -> Encoded {
        self.vocab.encode(handle, self.config.max_len)
    }

    /// Trains on raw handles with labels in `{+1, -1}`.
    pub fn fit_handles(&mut self, handles: &[String], labels: &[i8]) -> Result<()> {
        require_both_classes(labels)?;
        let cfg = self.config;
        if cfg.batch_size == 0 || cfg.max_len == 0 || cfg.hidden == 0 || cfg.embed_dim == 0 {
            return Err(Error::Config(
                "batch_size, max_len, hidden and embed_dim must be >= 1".into(),
            ));
        }
        if !(cfg.learning_rate > 0.0) {
            return Err(Error::Config(format!("learning_rate must be positive, got {}", cfg.learning_rate)));
        }
        let encoded: Vec<Encoded> = handles.iter().map(|h| self.encode(h)).collect();
        self.unknown_chars = encoded.iter().map(|e| e.unknown).sum();
        let targets: Vec<f64> = labels.iter().map(|&y| if y > 0 { 1.0 } else { 0.0 }).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut params = LstmParams::init(self.vocab.len(), cfg.embed_dim, cfg.hidden, cfg.init_scale, &mut rng);
        let mut adam = Adam::new(&params);
        let mut order: Vec<usize> = (0..handles.len()).collect();
        self.loss_history.clear();
        for epoch in 0..cfg.epochs {
            order.shuffle(&mut rng);
            let mut total = 0.0;
            for batch in order.chunks(cfg.batch_size) {
                let per_example: Vec<(f64, LstmParams)> = batch
                    .par_iter()
                    .map(|&i| {
                        let cache = forward(&params, &encoded[i].indices);
                        (bce(cache.p, targets[i]), backward(&params, &cache, targets[i]))
                    })
                    .collect();
                let mut grad = params.zeros_like();
                let scale = 1.0 / batch.len() as f64;
                for (l, g) in &per_example {
                    total += l;
                    grad.add_scaled(g, scale);
                }
                adam.step(&mut params, &grad, &cfg);
            }
            let mean = total / handles.len() as f64;
            if !mean.is_finite() || !params.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            self.loss_history.push(mean);
        }
        self.params = Some(params);
        Ok(())
    }

    /// Positive-class probability per handle.
    pub fn probabilities(&self, handles: &[String]) -> Result<Vec<f64>> {
        let params = self.params.as_ref().ok_or(Error::NotFitted)?;
        Ok(handles
            .par_iter()
            .map(|h| forward(params, &self.encode(h).indices).p)
            .collect())
    }
}

impl Model for CharLstm {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        self.fit_handles(&data.labeled.handles, &data.labels)
    }

    fn decision(&self, x: &Samples) -> Result<Vec<f64>> {
        Ok(self.probabilities(&x.handles)?.into_iter().map(|p| p - 0.5).collect())
    }
}
