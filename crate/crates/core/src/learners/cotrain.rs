//! Two-view co-training with linear SVMs.

use serde::{Deserialize, Serialize};

use super::svm::{fit_linear, LinearWeights, SvmParams};
use super::{check_dim, require_both_classes, Model};
use crate::error::{Error, Result};
use crate::features::{Dataset, Samples};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoTrainingParams {
    pub rounds: usize,
    /// Positives each view labels per round.
    pub p: usize,
    /// Negatives each view labels per round.
    pub n: usize,
    pub svm: SvmParams,
    /// Feature index partition; `None` uses the layout's default views.
    pub views: Option<(Vec<usize>, Vec<usize>)>,
}

impl Default for CoTrainingParams {
    fn default() -> Self {
        CoTrainingParams {
            rounds: 30,
            p: 1,
            n: 1,
            svm: SvmParams::default(),
            views: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoTraining {
    pub params: CoTrainingParams,
    pub views: (Vec<usize>, Vec<usize>),
    pub models: Option<(LinearWeights, LinearWeights)>,
    pub dim: usize,
    /// `(|pool A|, |pool B|)` before the first round and after every round.
    #[serde(skip)]
    pub pool_sizes: Vec<(usize, usize)>,
}

struct Pool {
    x: Vec<Vec<f64>>,
    y: Vec<i8>,
}

impl Pool {
    fn fit(&self, cols: &[usize], svm: &SvmParams) -> Result<LinearWeights> {
        let m = Matrix::from_rows(&self.x, self.x.first().map_or(0, |r| r.len())).select_cols(cols);
        Ok(fit_linear(&m, &self.y, svm)?.0)
    }
}

fn view_score(w: &LinearWeights, row: &[f64], cols: &[usize]) -> f64 {
    cols.iter().zip(&w.w).map(|(&c, wi)| row[c] * wi).sum::<f64>() + w.b
}

impl CoTraining {
    pub fn new(params: CoTrainingParams) -> Self {
        CoTraining {
            params,
            views: (Vec::new(), Vec::new()),
            models: None,
            dim: 0,
            pool_sizes: Vec::new(),
        }
    }

    fn check_views(views: &(Vec<usize>, Vec<usize>), dim: usize) -> Result<()> {
        let (a, b) = views;
        if a.is_empty() || b.is_empty() {
            return Err(Error::Config("co-training views must both be non-empty".into()));
        }
        if let Some(&bad) = a.iter().chain(b).find(|&&i| i >= dim) {
            return Err(Error::Config(format!("view index {bad} out of range for {dim} features")));
        }
        if a.iter().any(|i| b.contains(i)) {
            return Err(Error::Config("co-training views must be disjoint".into()));
        }
        Ok(())
    }

    /// Per-view decision scores.
    pub fn view_decisions(&self, x: &Samples) -> Result<(Vec<f64>, Vec<f64>)> {
        let (wa, wb) = self.models.as_ref().ok_or(Error::NotFitted)?;
        check_dim(x, self.dim)?;
        let sa = x.features.iter_rows().map(|r| view_score(wa, r, &self.views.0)).collect();
        let sb = x.features.iter_rows().map(|r| view_score(wb, r, &self.views.1)).collect();
        Ok((sa, sb))
    }
}

/// Indices of the `p` highest and `n` lowest scores among `pool`, with
/// their assigned labels. Ties go to the earlier pool entry.
fn most_confident(scores: &[f64], pool: &[usize], p: usize, n: usize) -> Vec<(usize, i8)> {
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let top = p.min(order.len());
    let mut picks: Vec<(usize, i8)> = order[..top].iter().map(|&i| (pool[i], 1)).collect();
    picks.extend(order[top..].iter().rev().take(n).map(|&i| (pool[i], -1)));
    picks
}

impl Model for CoTraining {
    fn fit(&mut self, data: &Dataset) -> Result<()> {
        require_both_classes(&data.labels)?;
        let dim = data.dim();
        let views = self.params.views.clone().unwrap_or_else(|| data.layout.cotraining_views());
        Self::check_views(&views, dim)?;
        let svm = self.params.svm;
        let labeled: Vec<Vec<f64>> = data.labeled.features.iter_rows().map(<[f64]>::to_vec).collect();
        let mut pool_a = Pool { x: labeled.clone(), y: data.labels.clone() };
        let mut pool_b = Pool { x: labeled, y: data.labels.clone() };
        let u = &data.unlabeled.features;
        let mut remaining: Vec<usize> = (0..u.rows()).collect();
        self.pool_sizes = vec![(pool_a.y.len(), pool_b.y.len())];
        for _ in 0..self.params.rounds {
            if remaining.is_empty() {
                break;
            }
            let wa = pool_a.fit(&views.0, &svm)?;
            let wb = pool_b.fit(&views.1, &svm)?;
            let sa: Vec<f64> = remaining.iter().map(|&i| view_score(&wa, u.row(i), &views.0)).collect();
            let picks_a = most_confident(&sa, &remaining, self.params.p, self.params.n);
            remaining.retain(|i| !picks_a.iter().any(|&(j, _)| j == *i));
            let sb: Vec<f64> = remaining.iter().map(|&i| view_score(&wb, u.row(i), &views.1)).collect();
            let picks_b = most_confident(&sb, &remaining, self.params.p, self.params.n);
            remaining.retain(|i| !picks_b.iter().any(|&(j, _)| j == *i));
            for (i, label) in picks_a {
                pool_b.x.push(u.row(i).to_vec());
                pool_b.y.push(label);
            }
            for (i, label) in picks_b {
                pool_a.x.push(u.row(i).to_vec());
                pool_a.y.push(label);
            }
            self.pool_sizes.push((pool_a.y.len(), pool_b.y.len()));
        }
        self.models = Some((pool_a.fit(&views.0, &svm)?, pool_b.fit(&views.1, &svm)?));
        self.views = views;
        self.dim = dim;
        Ok(())
    }

    fn decision(&self, x: &Samples) -> Result<Vec<f64>> {
        let (a, b) = self.view_decisions(x)?;
        Ok(a.iter().zip(&b).map(|(p, q)| 0.5 * (p + q)).collect())
    }

    fn is_semi_supervised(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureLayout;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Four features: 0-1 and 2-3 each separate the classes on their own.
    fn two_view_data(n_labeled: usize, n_unlabeled: usize, seed: u64) -> (Dataset, Vec<i8>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |y: f64| -> Vec<f64> {
            let mut r = Vec::with_capacity(4);
            for _ in 0..2 {
                let t: f64 = rng.random_range(-1.0..1.0);
                r.push(y * 0.8 + 2.0 * t);
                r.push(rng.random_range(-2.0..2.0));
            }
            r
        };
        let mut lab = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n_labeled {
            let y = if i % 2 == 0 { 1.0 } else { -1.0 };
            lab.push(draw(y));
            labels.push(y as i8);
        }
        let mut unl = Vec::new();
        let mut truth = Vec::new();
        for i in 0..n_unlabeled {
            let y = if i % 2 == 0 { 1.0 } else { -1.0 };
            unl.push(draw(y));
            truth.push(y as i8);
        }
        let data = Dataset::new(
            FeatureLayout::Handle5,
            Samples::from_features(Matrix::from_rows(&lab, 4)),
            labels,
            Samples::from_features(Matrix::from_rows(&unl, 4)),
        );
        (data, truth)
    }

    fn params(rounds: usize) -> CoTrainingParams {
        CoTrainingParams {
            rounds,
            views: Some((vec![0, 1], vec![2, 3])),
            ..Default::default()
        }
    }

    #[test]
    fn zero_rounds_equals_view_svms() {
        let (data, _) = two_view_data(10, 50, 1);
        let mut ct = CoTraining::new(params(0));
        ct.fit(&data).unwrap();
        let (wa, wb) = ct.models.clone().unwrap();
        let x = &data.labeled.features;
        let (a, _) = fit_linear(&x.select_cols(&[0, 1]), &data.labels, &SvmParams::default()).unwrap();
        let (b, _) = fit_linear(&x.select_cols(&[2, 3]), &data.labels, &SvmParams::default()).unwrap();
        assert_eq!(wa, a);
        assert_eq!(wb, b);
    }

    #[test]
    fn pools_grow_by_at_most_two_p_plus_n() {
        let (data, _) = two_view_data(10, 50, 2);
        let mut ct = CoTraining::new(params(40));
        ct.fit(&data).unwrap();
        for w in ct.pool_sizes.windows(2) {
            let before = w[0].0 + w[0].1;
            let after = w[1].0 + w[1].1;
            assert!(after > before && after - before <= 2 * (1 + 1));
        }
        // 50 unlabeled rows at 4 per round run out after 13 rounds
        assert_eq!(ct.pool_sizes.len(), 14);
    }

    #[test]
    fn bad_views_are_rejected() {
        let (data, _) = two_view_data(10, 5, 3);
        for views in [(vec![], vec![1]), (vec![0, 1], vec![1, 2]), (vec![0], vec![9])] {
            let mut ct = CoTraining::new(CoTrainingParams { views: Some(views), ..Default::default() });
            assert!(ct.fit(&data).is_err());
        }
    }

    #[test]
    fn most_confident_picks_extremes() {
        let picks = most_confident(&[0.1, 3.0, -2.0, 0.5], &[10, 11, 12, 13], 1, 1);
        assert_eq!(picks, vec![(11, 1), (12, -1)]);
    }
}
