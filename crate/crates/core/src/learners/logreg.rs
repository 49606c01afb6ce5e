use serde::{Deserialize, Serialize};

use super::svm::LinearWeights;
use super::{check_dim, require_both_classes, Model};
use crate::error::{Error, Result};
use crate::features::{Dataset, Samples};
use crate::linalg::{dot, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogRegParams {
    /// Inverse regularization strength.
    pub c: f64,
    /// Gradient-norm stopping threshold.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            c: 1.0,
            tol: 0.01,
            max_iter: 10_000,
        }
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `1/2 |w|^2 + C * sum_i log(1 + exp(-y_i (w.x_i + b)))` over `theta = [w, b]`.
/// The intercept is not penalized.
pub struct LogisticObjective<'a> {
    pub x: &'a Matrix,
    pub y: &'a [i8],
    pub c: f64,
}

impl LogisticObjective<'_> {
    fn margin(&self, theta: &[f64], i: usize) -> f64 {
        let d = self.x.cols();
        self.y[i] as f64 * (dot(&theta[..d], self.x.row(i)) + theta[d])
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        let d = self.x.cols();
        let reg = 0.5 * dot(&theta[..d], &theta[..d]);
        let loss: f64 = (0..self.x.rows()).map(|i| softplus(-self.margin(theta, i))).sum();
        reg + self.c * loss
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let d = self.x.cols();
        let mut g = theta.to_vec();
        g[d] = 0.0;
        for i in 0..self.x.rows() {
            // d/dm softplus(-m) = -sigmoid(-m)
            let coef = -self.c * self.y[i] as f64 * sigmoid(-self.margin(theta, i));
            for (gj, xj) in g.iter_mut().zip(self.x.row(i)) {
                *gj += coef * xj;
            }
            g[d] += coef;
        }
        g
    }
}

/// L2-regularized logistic regression fitted by gradient descent with an
/// Armijo backtracking line search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub params: LogRegParams,
    pub weights: Option<LinearWeights>,
    /// False when `max_iter` was reached before the gradient norm fell below `tol`.
    #[serde(default)]
    pub converged: bool,
    /// Objective after each accepted step.
    #[serde(skip)]
    pub loss_history: Vec<f64>,
}

impl LogisticRegression {
    pub fn new(params: LogRegParams) -> Self {
        LogisticRegression {
            params,
            weights: None,
            converged: false,
            loss_history: Vec::new(),
        }
    }
}

impl Model for LogisticRegression {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        require_both_classes(&data.labels)?;
        let obj = LogisticObjective {
            x: &data.labeled.features,
            y: &data.labels,
            c: self.params.c,
        };
        let mut theta = vec![0.0; data.dim() + 1];
        let mut value = obj.value(&theta);
        let mut step = 1.0;
        self.loss_history = vec![value];
        self.converged = false;
        for _ in 0..self.params.max_iter {
            let g = obj.gradient(&theta);
            let gnorm2 = dot(&g, &g);
            if gnorm2.sqrt() < self.params.tol {
                self.converged = true;
                break;
            }
            step *= 2.0;
            loop {
                let cand: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t - step * gi).collect();
                let cand_value = obj.value(&cand);
                if cand_value <= value - 0.5 * step * gnorm2 {
                    theta = cand;
                    value = cand_value;
                    break;
                }
                step *= 0.5;
                if step < 1e-20 {
                    break;
                }
            }
            if step < 1e-20 {
                break;
            }
            self.loss_history.push(value);
        }
        self.weights = Some(LinearWeights::from_augmented(theta));
        Ok(())
    }

    fn decision(&self, x: &Samples) -> Result<Vec<f64>> {
        let w = self.weights.as_ref().ok_or(Error::NotFitted)?;
        check_dim(x, w.w.len())?;
        Ok(w.scores(&x.features))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(seed: u64) -> (Matrix, Vec<i8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<[f64; 3]> = (0..30).map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
        let y = rows.iter().map(|r| if r[0] + 0.5 * r[1] + rng.random_range(-1.0..1.0) > 0.0 { 1 } else { -1 }).collect();
        (Matrix::from_rows(&rows, 3), y)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y) = random_problem(3);
        let obj = LogisticObjective { x: &x, y: &y, c: 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let theta: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = obj.gradient(&theta);
        let h = 1e-6;
        for j in 0..4 {
            let mut p = theta.clone();
            let mut m = theta.clone();
            p[j] += h;
            m[j] -= h;
            let fd = (obj.value(&p) - obj.value(&m)) / (2.0 * h);
            assert!((fd - g[j]).abs() <= 1e-6 * fd.abs().max(1.0), "{j}: {fd} vs {}", g[j]);
        }
    }

    #[test]
    fn loss_monotone_on_separable_data() {
        let x = Matrix::from_rows(&[[-2.0], [-1.0], [1.0], [2.0]], 1);
        let data = Dataset::supervised(x, vec![-1, -1, 1, 1]);
        let mut lr = LogisticRegression::new(LogRegParams { c: 1e4, ..Default::default() });
        lr.fit(&data).unwrap();
        assert!(lr.loss_history.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(lr.predict(&data.labeled).unwrap(), data.labels);
    }

    #[test]
    fn decision_is_affine() {
        let (x, y) = random_problem(5);
        let mut lr = LogisticRegression::new(LogRegParams::default());
        lr.fit(&Dataset::supervised(x, y)).unwrap();
        assert!(lr.converged);
        let w = lr.weights.as_ref().unwrap();
        let v = [0.3, -1.2, 2.0];
        let v2: Vec<f64> = v.iter().map(|a| 2.0 * a).collect();
        let lhs = w.score(&v2) - w.score(&v);
        assert!((lhs - dot(&w.w, &v)).abs() < 1e-12);
    }

    #[test]
    fn non_convergence_is_flagged_not_fatal() {
        let (x, y) = random_problem(6);
        let mut lr = LogisticRegression::new(LogRegParams { max_iter: 1, tol: 1e-12, ..Default::default() });
        lr.fit(&Dataset::supervised(x, y)).unwrap();
        assert!(!lr.converged);
    }
}
