use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::folds::FoldPlan;
use super::metrics::{positive_metrics, Metrics};
use crate::error::Result;
use crate::features::{Dataset, FeatureLayout, Samples};
use crate::learners::{FittedModel, LearnerSpec};

/// Seed for fold `fold` derived from `master`.
pub fn fold_seed(master: u64, fold: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(fold as u64 + 1);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train_labeled: usize,
    pub n_train_unlabeled: usize,
    pub n_test: usize,
    pub metrics: Option<Metrics>,
    pub error: Option<String>,
    #[serde(skip)]
    pub runtime_secs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerReport {
    pub learner: String,
    pub display_name: String,
    pub spec: Option<LearnerSpec>,
    pub folds: Vec<FoldResult>,
    /// Mean over successful folds; `None` if every fold failed.
    pub mean: Option<MeanMetrics>,
    pub failed_folds: usize,
}

impl LearnerReport {
    fn from_folds(learner: String, display_name: String, spec: Option<LearnerSpec>, folds: Vec<FoldResult>) -> Self {
        let ok: Vec<&Metrics> = folds.iter().filter_map(|f| f.metrics.as_ref()).collect();
        let mean = (!ok.is_empty()).then(|| {
            let k = ok.len() as f64;
            MeanMetrics {
                precision: ok.iter().map(|m| m.precision).sum::<f64>() / k,
                recall: ok.iter().map(|m| m.recall).sum::<f64>() / k,
                f1: ok.iter().map(|m| m.f1).sum::<f64>() / k,
            }
        });
        let failed_folds = folds.len() - ok.len();
        LearnerReport {
            learner,
            display_name,
            spec,
            folds,
            mean,
            failed_folds,
        }
    }

    pub fn mean_f1(&self) -> Option<f64> {
        self.mean.map(|m| m.f1)
    }
}

/// Training set for fold `f`: the other folds stay labeled, the held-out
/// rows join the unlabeled pool without their labels.
pub fn fold_dataset(data: &Dataset, plan: &FoldPlan, f: usize) -> (Dataset, Samples, Vec<i8>) {
    let train = plan.train_indices(f);
    let held = &plan.folds[f];
    let test = data.labeled.select(held);
    let truth = held.iter().map(|&i| data.labels[i]).collect();
    let ds = Dataset::new(
        data.layout,
        data.labeled.select(&train),
        train.iter().map(|&i| data.labels[i]).collect(),
        data.unlabeled.concat(&test),
    );
    (ds, test, truth)
}

/// Runs every fold through `fit_predict`, in parallel, and averages the
/// positive-class metrics over the folds that succeed.
pub fn cross_validate<F>(data: &Dataset, plan: &FoldPlan, fit_predict: F) -> Vec<FoldResult>
where
    F: Fn(usize, &Dataset, &Samples) -> Result<Vec<i8>> + Sync,
{
    (0..plan.folds.len())
        .into_par_iter()
        .map(|f| {
            let start = Instant::now();
            let (train, test, truth) = fold_dataset(data, plan, f);
            let outcome = fit_predict(f, &train, &test).and_then(|pred| positive_metrics(&truth, &pred));
            let (metrics, error) = match outcome {
                Ok(m) => (Some(m), None),
                Err(e) => (None, Some(e.to_string())),
            };
            FoldResult {
                fold: f,
                n_train_labeled: train.n_labeled(),
                n_train_unlabeled: train.n_unlabeled(),
                n_test: test.len(),
                metrics,
                error,
                runtime_secs: start.elapsed().as_secs_f64(),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub standardize: bool,
    pub seed: u64,
}

impl Default for CvOptions {
    fn default() -> Self {
        CvOptions {
            standardize: true,
            seed: 0,
        }
    }
}

/// Cross-validates a registered learner. Supervised learners never see the
/// unlabeled pool; semi-supervised ones get it plus the held-out rows.
pub fn run_cv(data: &Dataset, spec: &LearnerSpec, plan: &FoldPlan, opts: CvOptions) -> LearnerReport {
    let folds = cross_validate(data, plan, |f, train, test| {
        let spec = spec.with_seed(fold_seed(opts.seed, f));
        FittedModel::fit(&spec, train, opts.standardize)?.predict(test)
    });
    let kind = spec.kind();
    LearnerReport::from_folds(kind.name().into(), kind.display_name().into(), Some(spec.clone()), folds)
}

/// Cross-validates an arbitrary labeling function; used for baselines.
pub fn run_cv_with<F>(name: &str, data: &Dataset, plan: &FoldPlan, fit_predict: F) -> LearnerReport
where
    F: Fn(usize, &Dataset, &Samples) -> Result<Vec<i8>> + Sync,
{
    LearnerReport::from_folds(name.into(), name.into(), None, cross_validate(data, plan, fit_predict))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub layout: FeatureLayout,
    pub k: usize,
    pub seed: u64,
    pub standardize: bool,
    pub averaging: String,
    pub n_labeled: usize,
    pub n_unlabeled: usize,
    pub learners: Vec<LearnerReport>,
}

impl EvalReport {
    pub fn new(data: &Dataset, plan: &FoldPlan, standardize: bool, learners: Vec<LearnerReport>) -> Self {
        EvalReport {
            layout: data.layout,
            k: plan.k,
            seed: plan.seed,
            standardize,
            averaging: "macro over folds".into(),
            n_labeled: data.n_labeled(),
            n_unlabeled: data.n_unlabeled(),
            learners,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Fold runtimes, kept out of the main report so it stays reproducible.
    pub fn timings_json(&self) -> Result<String> {
        let v: Vec<serde_json::Value> = self
            .learners
            .iter()
            .map(|l| {
                serde_json::json!({
                    "learner": l.learner,
                    "fold_seconds": l.folds.iter().map(|f| f.runtime_secs).collect::<Vec<_>>(),
                })
            })
            .collect();
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn to_text(&self) -> String {
        let width = self
            .learners
            .iter()
            .map(|l| l.display_name.len())
            .max()
            .unwrap_or(0)
            .max(7);
        let mut out = format!(
            "{:<width$}  {:>9}  {:>6}  {:>8}  {:>6}\n",
            "Learner", "Precision", "Recall", "F1-score", "Failed"
        );
        for l in &self.learners {
            match l.mean {
                Some(m) => out.push_str(&format!(
                    "{:<width$}  {:>9.2}  {:>6.2}  {:>8.2}  {:>6}\n",
                    l.display_name, m.precision, m.recall, m.f1, l.failed_folds
                )),
                None => out.push_str(&format!(
                    "{:<width$}  {:>9}  {:>6}  {:>8}  {:>6}\n",
                    l.display_name, "-", "-", "-", l.failed_folds
                )),
            }
        }
        out.push_str(&format!(
            "\n{}-fold CV, {} labeled / {} unlabeled rows, {} layout, metrics for the positive class, {}.\n",
            self.k, self.n_labeled, self.n_unlabeled, self.layout, self.averaging
        ));
        out
    }
}
