//! Account detection from handle, profile and content signals.
//!
//! The crate is organized around the pipeline a batch run walks through:
//!
//! - [`corpus`]: the account data model, JSON Lines ingestion and a seeded
//!   synthetic corpus generator.
//! - [`features`]: the 13-feature account layout, the 5-feature handle layout,
//!   matrix assembly and the candidate filter.
//! - [`similarity`]: normalized Levenshtein similarity between handles and the
//!   one-sided two-sample test of whether positive handles cluster.
//! - [`learners`]: from-scratch supervised and semi-supervised classifiers
//!   behind the [`learners::Model`] contract.
//! - [`charlstm`]: a character-level LSTM classifier over raw handles.
//! - [`eval`]: stratified k-fold cross-validation, positive-class metrics and
//!   chi-squared feature significance.

pub mod charlstm;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod learners;
pub mod linalg;
pub mod similarity;
pub mod stats;

pub use corpus::{AccountRecord, Corpus, Label, Provenance, SynthConfig, TweetRecord};
pub use error::{Error, Result};
pub use features::{Dataset, FeatureLayout, FeatureMatrix, FeatureVector, Samples};
pub use learners::{FittedModel, LearnerKind, LearnerSpec, Model};
pub use similarity::SimilarityTestResult;
