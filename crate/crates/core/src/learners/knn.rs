use serde::{Deserialize, Serialize};

use super::graph::nearest;
use super::{check_dim, Model};
use crate::error::{Error, Result};
use crate::features::{Dataset, Samples};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KnnParams {
    pub k: usize,
}

impl Default for KnnParams {
    fn default() -> Self {
        KnnParams { k: 5 }
    }
}

/// Majority vote over the `k` nearest labeled rows (Euclidean). The score is
/// the positive share of the neighbors minus one half.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub params: KnnParams,
    pub train: Option<(Matrix, Vec<i8>)>,
}

impl Knn {
    pub fn new(params: KnnParams) -> Self {
        Knn { params, train: None }
    }
}

impl Model for Knn {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        let k = self.params.k;
        if k == 0 || k > data.n_labeled() {
            return Err(Error::InvalidInput(format!(
                "k = {k} must be in 1..={} (labeled rows)",
                data.n_labeled()
            )));
        }
        self.train = Some((data.labeled.features.clone(), data.labels.clone()));
        Ok(())
    }

    fn decision(&self, x: &Samples) -> Result<Vec<f64>> {
        let (train, y) = self.train.as_ref().ok_or(Error::NotFitted)?;
        check_dim(x, train.cols())?;
        let k = self.params.k;
        Ok(x
            .features
            .iter_rows()
            .map(|q| {
                let nbrs = nearest(train, q, k, None);
                let pos = nbrs.iter().filter(|&&j| y[j] > 0).count();
                pos as f64 / k as f64 - 0.5
            })
            .collect())
    }
}
