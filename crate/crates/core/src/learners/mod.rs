//! Supervised and semi-supervised classifiers behind one contract.
//!
//! Every learner implements [`Model`]: `fit` on a [`Dataset`], then
//! `decision` returns a real score per row (higher means more positive) and
//! `predict` returns `+1` for scores strictly above zero and `-1` otherwise.
//! [`LearnerSpec`] names a learner with its hyperparameters and builds a
//! [`FittedModel`], which adds optional standardization and serializes to a
//! versioned JSON checkpoint.

mod adaboost;
mod cotrain;
pub mod graph;
mod knn;
mod label_spreading;
mod laplacian_svm;
mod logreg;
mod naive_bayes;
mod random_forest;
mod registry;
mod svm;
mod tree;

use crate::error::{Error, Result};
use crate::features::{Dataset, Samples};

pub use adaboost::{AdaBoost, AdaBoostParams, Stump};
pub use cotrain::{CoTraining, CoTrainingParams};
pub use graph::{AffinityKernel, GraphLaplacian, KernelGram};
pub use knn::{Knn, KnnParams};
pub use label_spreading::{label_prior, spread, LabelSpreading, LabelSpreadingParams, Spread};
pub use laplacian_svm::{LaplacianSvm, LaplacianSvmParams};
pub use logreg::{LogisticObjective, LogisticRegression, LogRegParams};
pub use naive_bayes::GaussianNb;
pub use random_forest::{RandomForest, RandomForestParams};
pub use registry::{FittedModel, Learner, LearnerKind, LearnerSpec, MODEL_FORMAT, MODEL_FORMAT_VERSION};
pub use svm::{hinge_objective, LinearSvm, SvmParams};
pub use tree::{entropy_impurity, DecisionTree, TreeParams};

/// Tie rule shared by all learners: a score of exactly zero is negative.
#[inline]
pub fn sign_label(score: f64) -> i8 {
    if score > 0.0 {
        1
    } else {
        -1
    }
}

pub trait Model {
    fn fit(&mut self, data: &Dataset) -> Result<()>;

    /// One real score per row of `x`.
    fn decision(&self, x: &Samples) -> Result<Vec<f64>>;

    fn predict(&self, x: &Samples) -> Result<Vec<i8>> {
        Ok(self.decision(x)?.into_iter().map(sign_label).collect())
    }

    /// Semi-supervised learners also consume `Dataset::unlabeled`.
    fn is_semi_supervised(&self) -> bool {
        false
    }
}

pub(crate) fn require_both_classes(labels: &[i8]) -> Result<(usize, usize)> {
    let pos = labels.iter().filter(|&&y| y > 0).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InvalidInput(format!(
            "training data needs both classes, got {pos} positive and {neg} negative"
        )));
    }
    Ok((pos, neg))
}

pub(crate) fn check_dim(x: &Samples, dim: usize) -> Result<()> {
    if x.features.cols() != dim {
        return Err(Error::InvalidInput(format!(
            "expected {dim} feature columns, got {}",
            x.features.cols()
        )));
    }
    Ok(())
}
