//! Linear Laplacian SVM.
//!
//! Minimizes `1/2 |theta|^2 + C_l sum_labeled hinge + C_s s^T L s` where
//! `theta = [w, b]`, `s` are the scores of all rows and `L` is the
//! unnormalized Laplacian of a binary kNN graph. Writing `s = X theta` the
//! regularizer is `1/2 theta^T (I + 2 C_s X^T L X) theta`; whitening the rows
//! by its Cholesky factor turns the problem into a plain linear SVM.

use serde::{Deserialize, Serialize};

use super::graph::{knn_affinity, GraphLaplacian};
use super::svm::{augment, solve_dual, LinearWeights};
use super::{check_dim, require_both_classes, Model};
use crate::error::{Error, Result};
use crate::features::{Dataset, Samples};
use crate::linalg::{cholesky, dot, solve_lower, solve_lower_transpose, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaplacianSvmParams {
    pub c_l: f64,
    pub c_s: f64,
    pub k: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LaplacianSvmParams {
    fn default() -> Self {
        LaplacianSvmParams {
            c_l: 0.6,
            c_s: 0.6,
            k: 5,
            tol: 1e-3,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplacianSvm {
    pub params: LaplacianSvmParams,
    pub weights: Option<LinearWeights>,
    #[serde(default)]
    pub converged: bool,
}

/// `X^T L X` for augmented rows `x`.
fn manifold_matrix(x: &Matrix, lap: &GraphLaplacian) -> Matrix {
    let d = x.cols();
    let lx: Vec<Vec<f64>> = (0..d).map(|c| lap.apply(&x.column(c))).collect();
    let mut m = Matrix::zeros(d, d);
    for a in 0..d {
        let col = x.column(a);
        for (b, lxb) in lx.iter().enumerate() {
            m.set(a, b, dot(&col, lxb));
        }
    }
    // symmetrize away rounding
    for a in 0..d {
        for b in a + 1..d {
            let v = 0.5 * (m.get(a, b) + m.get(b, a));
            m.set(a, b, v);
            m.set(b, a, v);
        }
    }
    m
}

impl LaplacianSvm {
    pub fn new(params: LaplacianSvmParams) -> Self {
        LaplacianSvm {
            params,
            weights: None,
            converged: false,
        }
    }

    pub fn weights(&self) -> Result<&LinearWeights> {
        self.weights.as_ref().ok_or(Error::NotFitted)
    }

    /// `s^T L s` for the scores of `x` under the fitted weights.
    pub fn manifold_penalty(&self, x: &Matrix) -> Result<f64> {
        let w = self.weights()?;
        let lap = GraphLaplacian::new(knn_affinity(x, self.params.k.min(x.rows().saturating_sub(1))));
        Ok(lap.quadratic_form(&w.scores(x)))
    }
}

impl Model for LaplacianSvm {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        require_both_classes(&data.labels)?;
        let p = self.params;
        if !(p.c_l > 0.0) || !(p.c_s >= 0.0) {
            return Err(Error::Config(format!(
                "need C_l > 0 and C_s >= 0, got C_l = {} and C_s = {}",
                p.c_l, p.c_s
            )));
        }
        let labeled = augment(&data.labeled.features);
        let d = labeled.cols();
        let mut q = Matrix::zeros(d, d);
        for i in 0..d {
            q.set(i, i, 1.0);
        }
        if p.c_s > 0.0 {
            let raw = data.labeled.features.vstack(&data.unlabeled.features);
            let k = p.k.min(raw.rows().saturating_sub(1));
            if k == 0 {
                return Err(Error::InvalidInput("graph needs at least two rows".into()));
            }
            let lap = GraphLaplacian::new(knn_affinity(&raw, k));
            let m = manifold_matrix(&augment(&raw), &lap);
            for a in 0..d {
                for b in 0..d {
                    q.set(a, b, q.get(a, b) + 2.0 * p.c_s * m.get(a, b));
                }
            }
        }
        let r = cholesky(&q).ok_or_else(|| Error::InvalidInput("manifold regularizer is not positive definite".into()))?;
        let mut z = Matrix::zeros(labeled.rows(), d);
        for i in 0..labeled.rows() {
            z.row_mut(i).copy_from_slice(&solve_lower(&r, labeled.row(i)));
        }
        let sol = solve_dual(&z, &data.labels, p.c_l, p.tol, p.max_iter);
        let theta = solve_lower_transpose(&r, &sol.theta);
        self.weights = Some(LinearWeights::from_augmented(theta));
        self.converged = sol.converged;
        Ok(())
    }

    fn decision(&self, x: &Samples) -> Result<Vec<f64>> {
        let w = self.weights()?;
        check_dim(x, w.w.len())?;
        Ok(w.scores(&x.features))
    }

    fn is_semi_supervised(&self) -> bool {
        true
    }
}
