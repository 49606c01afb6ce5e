//! Discrete AdaBoost (SAMME, two classes) over depth-1 stumps.

use serde::{Deserialize, Serialize};

use super::{check_dim, require_both_classes, Model};
use crate::error::{Error, Result};
use crate::features::{Dataset, Samples};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdaBoostParams {
    pub n_estimators: usize,
    pub learning_rate: f64,
}

impl Default for AdaBoostParams {
    fn default() -> Self {
        AdaBoostParams {
            n_estimators: 200,
            learning_rate: 0.01,
        }
    }
}

/// `h(x) = polarity` when `x[feature] > threshold`, else `-polarity`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: i8,
}

impl Stump {
    #[inline]
    pub fn predict_row(&self, row: &[f64]) -> i8 {
        if row[self.feature] > self.threshold {
            self.polarity
        } else {
            -self.polarity
        }
    }

    /// Lowest weighted error stump; thresholds are midpoints between
    /// consecutive distinct values. `None` when every feature is constant.
    pub fn best(x: &Matrix, y: &[i8], w: &[f64]) -> Option<(Stump, f64)> {
        let total: f64 = w.iter().sum();
        let mut best: Option<(Stump, f64)> = None;
        let mut order: Vec<usize> = (0..x.rows()).collect();
        for f in 0..x.cols() {
            order.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)));
            // error of "positive above threshold" = positive mass at or below
            // plus negative mass above
            let neg_total: f64 = order.iter().filter(|&&i| y[i] < 0).map(|&i| w[i]).sum();
            let mut err = neg_total;
            for k in 0..order.len().saturating_sub(1) {
                let i = order[k];
                if y[i] > 0 {
                    err += w[i];
                } else {
                    err -= w[i];
                }
                let (lo, hi) = (x.get(i, f), x.get(order[k + 1], f));
                if lo == hi {
                    continue;
                }
                let threshold = 0.5 * (lo + hi);
                for (polarity, e) in [(1i8, err), (-1i8, total - err)] {
                    let e = e.max(0.0) / total;
                    if best.as_ref().is_none_or(|b| e < b.1) {
                        best = Some((Stump { feature: f, threshold, polarity }, e));
                    }
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaBoost {
    pub params: AdaBoostParams,
    pub stumps: Vec<(Stump, f64)>,
    /// Constant answer used when the stump weights sum to zero.
    pub fallback: Option<i8>,
    pub dim: usize,
    /// Sample-weight total after each round's renormalization.
    #[serde(skip)]
    pub weight_sums: Vec<f64>,
    /// Training error of the ensemble after each round.
    #[serde(skip)]
    pub train_errors: Vec<f64>,
}

impl AdaBoost {
    pub fn new(params: AdaBoostParams) -> Self {
        AdaBoost {
            params,
            stumps: Vec::new(),
            fallback: None,
            dim: 0,
            weight_sums: Vec::new(),
            train_errors: Vec::new(),
        }
    }

    fn raw_score(&self, row: &[f64]) -> f64 {
        self.stumps.iter().map(|(s, a)| a * s.predict_row(row) as f64).sum()
    }
}

impl Model for AdaBoost {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        require_both_classes(&data.labels)?;
        let n = data.n_labeled();
        let lr = self.params.learning_rate;
        if !(lr >= 0.0) || !lr.is_finite() {
            return Err(Error::Config(format!("learning_rate must be >= 0, got {lr}")));
        }
        let x = &data.labeled.features;
        let y = &data.labels;
        let mut w = vec![1.0 / n as f64; n];
        let mut ensemble = vec![0.0; n];
        self.stumps.clear();
        self.weight_sums.clear();
        self.train_errors.clear();
        for _ in 0..self.params.n_estimators {
            let Some((stump, err)) = Stump::best(x, y, &w) else {
                break;
            };
            if err >= 0.5 {
                break;
            }
            let perfect = err <= 0.0;
            let alpha = if perfect { 1.0 } else { lr * ((1.0 - err) / err).ln() };
            for i in 0..n {
                let h = stump.predict_row(x.row(i));
                ensemble[i] += alpha * h as f64;
                if h != y[i] {
                    w[i] *= alpha.exp();
                }
            }
            let sum: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= sum);
            self.weight_sums.push(w.iter().sum());
            let wrong = ensemble
                .iter()
                .zip(y)
                .filter(|(s, &yi)| super::sign_label(**s) != yi)
                .count();
            self.train_errors.push(wrong as f64 / n as f64);
            self.stumps.push((stump, alpha));
            if perfect {
                break;
            }
        }
        let total_alpha: f64 = self.stumps.iter().map(|s| s.1).sum();
        self.fallback = if total_alpha > 0.0 {
            None
        } else {
            let (pos, neg) = data.class_counts();
            Some(if pos > neg { 1 } else { -1 })
        };
        self.dim = data.dim();
        Ok(())
    }

    fn decision(&self, x: &Samples) -> Result<Vec<f64>> {
        if self.stumps.is_empty() && self.fallback.is_none() {
            return Err(Error::NotFitted);
        }
        check_dim(x, self.dim)?;
        if let Some(label) = self.fallback {
            return Ok(vec![label as f64; x.len()]);
        }
        let total: f64 = self.stumps.iter().map(|s| s.1).sum();
        Ok(x.features.iter_rows().map(|r| self.raw_score(r) / total).collect())
    }
}
