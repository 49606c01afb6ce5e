use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::{DecisionTree, TreeParams};
use super::{check_dim, Model};
use crate::error::{Error, Result};
use crate::features::{Dataset, Samples};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RandomForestParams {
    pub n_trees: usize,
    pub bootstrap: bool,
    /// Features per split; `None` uses `floor(sqrt(d))`.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
    pub seed: u64,
}

impl Default for RandomForestParams {
    fn default() -> Self {
        RandomForestParams {
            n_trees: 200,
            bootstrap: true,
            max_features: None,
            min_samples_split: 2,
            seed: 0,
        }
    }
}

/// Bagged entropy trees. The score is the share of trees voting positive
/// minus one half. Tree `t` draws from stream `t` of a generator seeded with
/// `seed`, so results do not depend on thread scheduling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub params: RandomForestParams,
    pub trees: Vec<DecisionTree>,
    pub dim: usize,
}

impl RandomForest {
    pub fn new(params: RandomForestParams) -> Self {
        RandomForest {
            params,
            trees: Vec::new(),
            dim: 0,
        }
    }
}

impl Model for RandomForest {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        let n = data.n_labeled();
        if n == 0 {
            return Err(Error::InvalidInput("no labeled rows".into()));
        }
        if self.params.n_trees == 0 {
            return Err(Error::Config("n_trees must be >= 1".into()));
        }
        let d = data.dim();
        let tree_params = TreeParams {
            max_features: Some(
                self.params
                    .max_features
                    .unwrap_or_else(|| ((d as f64).sqrt().floor() as usize).max(1)),
            ),
            min_samples_split: self.params.min_samples_split,
        };
        let x = &data.labeled.features;
        let y = &data.labels;
        let p = self.params;
        self.trees = (0..p.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
                rng.set_stream(t as u64);
                let idx: Vec<usize> = if p.bootstrap {
                    (0..n).map(|_| rng.random_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                DecisionTree::fit(x, y, &idx, &tree_params, &mut rng)
            })
            .collect();
        self.dim = d;
        Ok(())
    }

    fn decision(&self, x: &Samples) -> Result<Vec<f64>> {
        if self.trees.is_empty() {
            return Err(Error::NotFitted);
        }
        check_dim(x, self.dim)?;
        let n_trees = self.trees.len() as f64;
        Ok(x.features
            .iter_rows()
            .map(|r| {
                let votes = self.trees.iter().filter(|t| t.predict_row(r) > 0).count();
                votes as f64 / n_trees - 0.5
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn noisy_blobs(seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..120 {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            rows.push([s + rng.random_range(-1.5..1.5), s + rng.random_range(-1.5..1.5), rng.random_range(-1.0..1.0)]);
            y.push(s as i8);
        }
        Dataset::supervised(Matrix::from_rows(&rows, 3), y)
    }

    fn accuracy(m: &RandomForest, d: &Dataset) -> f64 {
        let p = m.predict(&d.labeled).unwrap();
        p.iter().zip(&d.labels).filter(|(a, b)| a == b).count() as f64 / p.len() as f64
    }

    #[test]
    fn forest_at_least_as_good_as_one_tree_on_training_data() {
        let d = noisy_blobs(2);
        let mut one = RandomForest::new(RandomForestParams { n_trees: 1, seed: 9, ..Default::default() });
        one.fit(&d).unwrap();
        let mut many = RandomForest::new(RandomForestParams { seed: 9, ..Default::default() });
        many.fit(&d).unwrap();
        assert!(accuracy(&many, &d) >= accuracy(&one, &d));
    }

    #[test]
    fn same_seed_same_predictions() {
        let d = noisy_blobs(3);
        let mut a = RandomForest::new(RandomForestParams { n_trees: 25, seed: 1, ..Default::default() });
        let mut b = a.clone();
        a.fit(&d).unwrap();
        b.fit(&d).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.decision(&d.labeled).unwrap(), b.decision(&d.labeled).unwrap());
    }

    #[test]
    fn single_class_forest_predicts_that_class() {
        let d = Dataset::supervised(Matrix::from_rows(&[[0.0], [1.0], [2.0]], 1), vec![-1, -1, -1]);
        let mut f = RandomForest::new(RandomForestParams { n_trees: 5, ..Default::default() });
        f.fit(&d).unwrap();
        assert_eq!(f.predict(&d.labeled).unwrap(), vec![-1, -1, -1]);
    }
}
