use serde::{Deserialize, Serialize};

use super::{check_dim, require_both_classes, Model};
use crate::error::{Error, Result};
use crate::features::{Dataset, Samples};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ClassGaussian {
    log_prior: f64,
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl ClassGaussian {
    fn log_likelihood(&self, x: &[f64]) -> f64 {
        let ln_2pi = (2.0 * std::f64::consts::PI).ln();
        self.log_prior
            + x.iter()
                .zip(&self.mean)
                .zip(&self.var)
                .map(|((xi, m), v)| -0.5 * (ln_2pi + v.ln() + (xi - m).powi(2) / v))
                .sum::<f64>()
    }
}

/// Gaussian naive Bayes. The score is the posterior log-odds of the
/// positive class. Every variance gets `1e-9 * max feature variance` added.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    classes: Option<[ClassGaussian; 2]>,
}

pub const VAR_SMOOTHING: f64 = 1e-9;

impl GaussianNb {
    pub fn new() -> Self {
        Self::default()
    }
}

fn moments(rows: &[&[f64]], d: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for r in rows {
        for j in 0..d {
            mean[j] += r[j] / n;
        }
    }
    let mut var = vec![0.0; d];
    for r in rows {
        for j in 0..d {
            var[j] += (r[j] - mean[j]).powi(2) / n;
        }
    }
    (mean, var)
}

impl Model for GaussianNb {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        let (n_pos, n_neg) = require_both_classes(&data.labels)?;
        let x = &data.labeled.features;
        let d = x.cols();
        let all: Vec<&[f64]> = x.iter_rows().collect();
        let (_, total_var) = moments(&all, d);
        let max_var = total_var.iter().copied().fold(0.0, f64::max);
        let eps = if max_var > 0.0 { VAR_SMOOTHING * max_var } else { VAR_SMOOTHING };
        let n = data.n_labeled() as f64;
        let class = |sign: i8, count: usize| {
            let rows: Vec<&[f64]> = x.iter_rows().zip(&data.labels).filter(|(_, &y)| y == sign).map(|(r, _)| r).collect();
            let (mean, var) = moments(&rows, d);
            ClassGaussian {
                log_prior: (count as f64 / n).ln(),
                mean,
                var: var.into_iter().map(|v| v + eps).collect(),
            }
        };
        self.classes = Some([class(1, n_pos), class(-1, n_neg)]);
        Ok(())
    }

    fn decision(&self, x: &Samples) -> Result<Vec<f64>> {
        let [pos, neg] = self.classes.as_ref().ok_or(Error::NotFitted)?;
        check_dim(x, pos.mean.len())?;
        Ok(x.features.iter_rows().map(|r| pos.log_likelihood(r) - neg.log_likelihood(r)).collect())
    }
}
