//! Cross-validation, positive-class metrics and feature significance.

mod chi2;
mod cv;
mod folds;
mod metrics;

pub use chi2::{chi2_significance, feature_frequency_report, frequency_text, Chi2Row, Chi2Table, FrequencyRow};
pub use cv::{
    cross_validate, fold_dataset, fold_seed, run_cv, run_cv_with, CvOptions, EvalReport, FoldResult, LearnerReport,
    MeanMetrics,
};
pub use folds::{make_folds, FoldPlan};
pub use metrics::{positive_metrics, Confusion, Metrics};
