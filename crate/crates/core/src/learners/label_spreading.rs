//! Label spreading over a symmetrically normalized affinity graph.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{affinity, nearest, rbf_kernel, symmetric_normalize, AffinityKernel};
use super::{check_dim, require_both_classes, Model};
use crate::error::{Error, Result};
use crate::features::{Dataset, Samples};
use crate::linalg::{CsrMatrix, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelSpreadingParams {
    pub kernel: AffinityKernel,
    /// Clamping factor in `[0, 1)`.
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LabelSpreadingParams {
    fn default() -> Self {
        LabelSpreadingParams {
            kernel: AffinityKernel::Rbf { gamma: 20.0 },
            alpha: 0.8,
            tol: 1e-6,
            max_iter: 1000,
        }
    }
}

/// Result of iterating `F <- alpha S F + (1 - alpha) Y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spread {
    /// `n x 2`: column 0 is the positive mass, column 1 the negative mass.
    pub f: Matrix,
    pub iterations: usize,
    pub converged: bool,
    /// `max |F_t - F_{t-1}|` per iteration.
    pub deltas: Vec<f64>,
}

/// Runs the spreading iteration on a normalized affinity `s` and prior `y`
/// (`n x 2`).
pub fn spread(s: &CsrMatrix, y: &Matrix, alpha: f64, tol: f64, max_iter: usize) -> Spread {
    let n = y.rows();
    let mut f = y.clone();
    let mut deltas = Vec::new();
    let mut converged = false;
    let y_pos = y.column(0);
    let y_neg = y.column(1);
    while deltas.len() < max_iter {
        let sp = s.mul_vec(&f.column(0));
        let sn = s.mul_vec(&f.column(1));
        let mut next = Matrix::zeros(n, 2);
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let p = alpha * sp[i] + (1.0 - alpha) * y_pos[i];
            let q = alpha * sn[i] + (1.0 - alpha) * y_neg[i];
            delta = delta.max((p - f.get(i, 0)).abs()).max((q - f.get(i, 1)).abs());
            next.set(i, 0, p);
            next.set(i, 1, q);
        }
        f = next;
        deltas.push(delta);
        if delta < tol {
            converged = true;
            break;
        }
    }
    Spread {
        iterations: deltas.len(),
        f,
        converged,
        deltas,
    }
}

/// One-hot prior: labeled rows first, then unlabeled zero rows.
pub fn label_prior(labels: &[i8], n_unlabeled: usize) -> Matrix {
    let mut y = Matrix::zeros(labels.len() + n_unlabeled, 2);
    for (i, &l) in labels.iter().enumerate() {
        y.set(i, if l > 0 { 0 } else { 1 }, 1.0);
    }
    y
}

/// Graph nodes are the labeled rows followed by the unlabeled rows. New rows
/// are scored by kernel-weighting the row-normalized label distributions of
/// the graph nodes (all nodes for RBF, the `k` nearest for kNN). When that
/// weight is zero the global label majority is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSpreading {
    pub params: LabelSpreadingParams,
    pub nodes: Option<Matrix>,
    /// Row-normalized label distributions, `n x 2`.
    pub distributions: Option<Matrix>,
    pub majority: i8,
    /// Graph nodes that received no label mass.
    pub isolated_nodes: usize,
    #[serde(skip)]
    pub transduction: Option<Spread>,
}

impl LabelSpreading {
    pub fn new(params: LabelSpreadingParams) -> Self {
        LabelSpreading {
            params,
            nodes: None,
            distributions: None,
            majority: -1,
            isolated_nodes: 0,
            transduction: None,
        }
    }

    fn score_row(&self, nodes: &Matrix, dist: &Matrix, q: &[f64]) -> Option<f64> {
        let (mut pos, mut neg) = (0.0, 0.0);
        match self.params.kernel {
            AffinityKernel::Rbf { gamma } => {
                for j in 0..nodes.rows() {
                    let w = rbf_kernel(nodes.row(j), q, gamma);
                    pos += w * dist.get(j, 0);
                    neg += w * dist.get(j, 1);
                }
            }
            AffinityKernel::Knn { k } => {
                for j in nearest(nodes, q, k, None) {
                    pos += dist.get(j, 0);
                    neg += dist.get(j, 1);
                }
            }
        }
        let total = pos + neg;
        (total > 0.0).then(|| (pos - neg) / total)
    }
}

impl Model for LabelSpreading {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        let (pos, neg) = require_both_classes(&data.labels)?;
        let p = self.params;
        if !(0.0..1.0).contains(&p.alpha) {
            return Err(Error::Config(format!("alpha must be in [0, 1), got {}", p.alpha)));
        }
        match p.kernel {
            AffinityKernel::Rbf { gamma } if !(gamma > 0.0) => {
                return Err(Error::Config(format!("gamma must be positive, got {gamma}")))
            }
            AffinityKernel::Knn { k: 0 } => return Err(Error::Config("k must be >= 1".into())),
            _ => {}
        }
        let nodes = data.labeled.features.vstack(&data.unlabeled.features);
        let s = symmetric_normalize(&affinity(&nodes, p.kernel));
        let y = label_prior(&data.labels, data.n_unlabeled());
        let result = spread(&s, &y, p.alpha, p.tol, p.max_iter);
        let mut dist = result.f.clone();
        let mut isolated = 0;
        for i in 0..dist.rows() {
            let t = dist.get(i, 0) + dist.get(i, 1);
            if t > 0.0 {
                dist.set(i, 0, dist.get(i, 0) / t);
                dist.set(i, 1, dist.get(i, 1) / t);
            } else {
                isolated += 1;
            }
        }
        self.majority = if pos > neg { 1 } else { -1 };
        self.isolated_nodes = isolated;
        self.nodes = Some(nodes);
        self.distributions = Some(dist);
        self.transduction = Some(result);
        Ok(())
    }

    fn decision(&self, x: &Samples) -> Result<Vec<f64>> {
        let (Some(nodes), Some(dist)) = (&self.nodes, &self.distributions) else {
            return Err(Error::NotFitted);
        };
        check_dim(x, nodes.cols())?;
        let fallback = self.majority as f64;
        let rows: Vec<&[f64]> = x.features.iter_rows().collect();
        Ok(rows
            .par_iter()
            .map(|q| self.score_row(nodes, dist, q).unwrap_or(fallback))
            .collect())
    }

    fn is_semi_supervised(&self) -> bool {
        true
    }
}
