//! Linear soft-margin SVM trained by dual coordinate descent.
//!
//! The primal is `1/2 (|w|^2 + b^2) + C * sum_i max(0, 1 - y_i (w.x_i + b))`:
//! the bias is an extra constant feature and is regularized with the weights.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_dim, require_both_classes, Model};
use crate::error::{Error, Result};
use crate::features::{Dataset, Samples};
use crate::linalg::{dot, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmParams {
    pub c: f64,
    /// Stop when the projected-gradient spread of an epoch falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            tol: 1e-3,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearWeights {
    pub w: Vec<f64>,
    pub b: f64,
}

impl LinearWeights {
    #[inline]
    pub fn score(&self, x: &[f64]) -> f64 {
        dot(&self.w, x) + self.b
    }

    pub fn scores(&self, x: &Matrix) -> Vec<f64> {
        x.iter_rows().map(|r| self.score(r)).collect()
    }

    /// Splits an augmented `[w, b]` vector.
    pub(crate) fn from_augmented(mut theta: Vec<f64>) -> Self {
        let b = theta.pop().expect("augmented vector has a bias entry");
        LinearWeights { w: theta, b }
    }
}

/// Primal objective of a linear SVM at `(w, b)`.
pub fn hinge_objective(weights: &LinearWeights, x: &Matrix, y: &[i8], c: f64) -> f64 {
    let reg = 0.5 * (dot(&weights.w, &weights.w) + weights.b * weights.b);
    let loss: f64 = x
        .iter_rows()
        .zip(y)
        .map(|(r, &yi)| (1.0 - yi as f64 * weights.score(r)).max(0.0))
        .sum();
    reg + c * loss
}

pub(crate) struct DualSolution {
    pub theta: Vec<f64>,
    pub converged: bool,
}

/// Dual coordinate descent for the hinge-loss SVM on pre-augmented rows `z`.
pub(crate) fn solve_dual(z: &Matrix, y: &[i8], c: f64, tol: f64, max_iter: usize) -> DualSolution {
    let n = z.rows();
    let d = z.cols();
    let mut alpha = vec![0.0; n];
    let mut theta = vec![0.0; d];
    let qdiag: Vec<f64> = z.iter_rows().map(|r| dot(r, r)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    // fixed stream: the visiting order only affects results within `tol`
    let mut rng = ChaCha8Rng::seed_from_u64(0x05ee_d5f3);
    let mut epochs = 0;
    let mut converged = false;
    while epochs < max_iter {
        epochs += 1;
        order.shuffle(&mut rng);
        let mut pg_max = f64::NEG_INFINITY;
        let mut pg_min = f64::INFINITY;
        for &i in &order {
            if qdiag[i] <= 0.0 {
                continue;
            }
            let yi = y[i] as f64;
            let zi = z.row(i);
            let g = yi * dot(&theta, zi) - 1.0;
            let pg = if alpha[i] <= 0.0 {
                g.min(0.0)
            } else if alpha[i] >= c {
                g.max(0.0)
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / qdiag[i]).clamp(0.0, c);
                let delta = (alpha[i] - old) * yi;
                for (t, v) in theta.iter_mut().zip(zi) {
                    *t += delta * v;
                }
            }
        }
        if pg_max - pg_min <= tol {
            converged = true;
            break;
        }
    }
    DualSolution { theta, converged }
}

pub(crate) fn augment(x: &Matrix) -> Matrix {
    let d = x.cols();
    let mut out = Matrix::zeros(x.rows(), d + 1);
    for i in 0..x.rows() {
        let row = out.row_mut(i);
        row[..d].copy_from_slice(x.row(i));
        row[d] = 1.0;
    }
    out
}

/// Fits a linear SVM on raw rows. Shared by co-training.
pub(crate) fn fit_linear(x: &Matrix, y: &[i8], params: &SvmParams) -> Result<(LinearWeights, bool)> {
    require_both_classes(y)?;
    if !(params.c > 0.0) {
        return Err(Error::Config(format!("SVM C must be positive, got {}", params.c)));
    }
    let sol = solve_dual(&augment(x), y, params.c, params.tol, params.max_iter);
    Ok((LinearWeights::from_augmented(sol.theta), sol.converged))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub params: SvmParams,
    pub weights: Option<LinearWeights>,
    #[serde(default)]
    pub converged: bool,
}

impl LinearSvm {
    pub fn new(params: SvmParams) -> Self {
        LinearSvm {
            params,
            weights: None,
            converged: false,
        }
    }

    pub fn weights(&self) -> Result<&LinearWeights> {
        self.weights.as_ref().ok_or(Error::NotFitted)
    }
}

impl Model for LinearSvm {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        let (w, converged) = fit_linear(&data.labeled.features, &data.labels, &self.params)?;
        self.weights = Some(w);
        self.converged = converged;
        Ok(())
    }

    fn decision(&self, x: &Samples) -> Result<Vec<f64>> {
        let w = self.weights()?;
        check_dim(x, w.w.len())?;
        Ok(w.scores(&x.features))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn clusters(seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..40 {
            let sign = if i < 20 { 1.0 } else { -1.0 };
            rows.push(vec![5.0 * sign + rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]);
            y.push(sign as i8);
        }
        Dataset::supervised(Matrix::from_rows(&rows, 2), y)
    }

    #[test]
    fn separable_clusters() {
        let data = clusters(1);
        let mut svm = LinearSvm::new(SvmParams::default());
        svm.fit(&data).unwrap();
        assert!(svm.converged);
        assert_eq!(svm.predict(&data.labeled).unwrap(), data.labels);
    }

    #[test]
    fn xor_is_not_linearly_fit() {
        let x = Matrix::from_rows(&[[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]], 2);
        let data = Dataset::supervised(x, vec![1, 1, -1, -1]);
        let mut svm = LinearSvm::new(SvmParams::default());
        svm.fit(&data).unwrap();
        let pred = svm.predict(&data.labeled).unwrap();
        let acc = pred.iter().zip(&data.labels).filter(|(a, b)| a == b).count() as f64 / 4.0;
        assert!(acc <= 0.75);
    }

    #[test]
    fn objective_not_worse_than_zero() {
        for seed in 0..5 {
            let data = clusters(seed);
            let mut svm = LinearSvm::new(SvmParams { c: 0.3, ..Default::default() });
            svm.fit(&data).unwrap();
            let zero = LinearWeights { w: vec![0.0; 2], b: 0.0 };
            let fitted = hinge_objective(svm.weights().unwrap(), &data.labeled.features, &data.labels, 0.3);
            let base = hinge_objective(&zero, &data.labeled.features, &data.labels, 0.3);
            assert!(fitted <= base);
        }
    }

    #[test]
    fn errors() {
        let x = Matrix::from_rows(&[[0.0], [1.0]], 1);
        let mut svm = LinearSvm::new(SvmParams::default());
        assert!(matches!(svm.decision(&Samples::from_features(x.clone())), Err(Error::NotFitted)));
        assert!(svm.fit(&Dataset::supervised(x, vec![1, 1])).is_err());
    }
}
