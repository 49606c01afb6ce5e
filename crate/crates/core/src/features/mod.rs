//! Handle, profile and content features.
//!
//! Two fixed layouts are supported. [`FeatureLayout::Handle5`] uses only the
//! handle string; [`FeatureLayout::Full13`] adds the profile and content groups.

mod filter;
mod matrix;
pub mod text;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::AccountRecord;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub use filter::{filter_candidates, parse_rules, CompareOp, FilterRule};
pub use matrix::{build_matrix, FeatureMatrix, Standardizer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureLayout {
    Handle5,
    Full13,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureGroup {
    Handle,
    Profile,
    Content,
}

const HANDLE5: [(&str, FeatureGroup); 5] = [
    ("length", FeatureGroup::Handle),
    ("max_char_occurrence", FeatureGroup::Handle),
    ("unique_chars", FeatureGroup::Handle),
    ("leading_digits", FeatureGroup::Handle),
    ("complexity", FeatureGroup::Handle),
];

const FULL13: [(&str, FeatureGroup); 13] = [
    ("length", FeatureGroup::Handle),
    ("unique_chars", FeatureGroup::Handle),
    ("complexity", FeatureGroup::Handle),
    ("followers", FeatureGroup::Profile),
    ("friends", FeatureGroup::Profile),
    ("statuses", FeatureGroup::Profile),
    ("has_description", FeatureGroup::Profile),
    ("has_location", FeatureGroup::Profile),
    ("verified", FeatureGroup::Profile),
    ("geo_enabled", FeatureGroup::Profile),
    ("url_count", FeatureGroup::Content),
    ("hashtag_count", FeatureGroup::Content),
    ("negative_sentiment_flag", FeatureGroup::Content),
];

impl FeatureLayout {
    pub fn spec(self) -> &'static [(&'static str, FeatureGroup)] {
        match self {
            FeatureLayout::Handle5 => &HANDLE5,
            FeatureLayout::Full13 => &FULL13,
        }
    }

    pub fn dim(self) -> usize {
        self.spec().len()
    }

    pub fn names(self) -> Vec<&'static str> {
        self.spec().iter().map(|(n, _)| *n).collect()
    }

    pub fn index_of(self, name: &str) -> Option<usize> {
        self.spec().iter().position(|(n, _)| *n == name)
    }

    /// Two disjoint feature-index views for co-training.
    pub fn cotraining_views(self) -> (Vec<usize>, Vec<usize>) {
        match self {
            FeatureLayout::Handle5 => (vec![0, 2, 4], vec![1, 3]),
            FeatureLayout::Full13 => (vec![0, 1, 2, 10, 11, 12], vec![3, 4, 5, 6, 7, 8, 9]),
        }
    }

    pub fn extract(self, record: &AccountRecord) -> FeatureVector {
        match self {
            FeatureLayout::Handle5 => extract_handle5(&record.handle)
                .expect("validated records have non-empty handles"),
            FeatureLayout::Full13 => extract_full13(record),
        }
    }
}

impl std::fmt::Display for FeatureLayout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FeatureLayout::Handle5 => "handle5",
            FeatureLayout::Full13 => "full13",
        })
    }
}

impl std::str::FromStr for FeatureLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "handle5" => Ok(FeatureLayout::Handle5),
            "full13" => Ok(FeatureLayout::Full13),
            _ => Err(Error::Config(format!("unknown feature layout {s:?} (expected handle5 or full13)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub layout: FeatureLayout,
    pub values: Vec<f64>,
}

fn char_counts(s: &str) -> BTreeMap<char, usize> {
    let mut counts = BTreeMap::new();
    for c in s.chars() {
        *counts.entry(c).or_insert(0) += 1;
    }
    counts
}

/// Shannon entropy in bits of the character distribution of `s`.
pub fn shannon_entropy(s: &str) -> Result<f64> {
    let n = s.chars().count();
    if n == 0 {
        return Err(Error::InvalidInput("entropy of an empty string".into()));
    }
    let n = n as f64;
    let h = char_counts(s)
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>();
    // a single-symbol string yields -0.0
    Ok(h.max(0.0))
}

/// Length of the run of ASCII digits at the start of `s`.
pub fn leading_digits(s: &str) -> usize {
    s.chars().take_while(|c| c.is_ascii_digit()).count()
}

/// `[length, max_char_occurrence, unique_chars, leading_digits, complexity]`.
pub fn extract_handle5(handle: &str) -> Result<FeatureVector> {
    if handle.is_empty() {
        return Err(Error::InvalidInput("empty handle".into()));
    }
    let counts = char_counts(handle);
    let len = handle.chars().count();
    let max_occ = counts.values().copied().max().unwrap_or(0);
    Ok(FeatureVector {
        layout: FeatureLayout::Handle5,
        values: vec![
            len as f64,
            max_occ as f64,
            counts.len() as f64,
            leading_digits(handle) as f64,
            shannon_entropy(handle)?,
        ],
    })
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Handle group, profile group, then content summed over all tweets.
pub fn extract_full13(account: &AccountRecord) -> FeatureVector {
    let h = &account.handle;
    let (urls, tags, pos, neg) = account.tweets.iter().fold((0u64, 0u64, 0.0, 0.0), |acc, t| {
        (
            acc.0 + t.url_count,
            acc.1 + t.hashtag_count,
            acc.2 + t.sentiment_positive,
            acc.3 + t.sentiment_negative,
        )
    });
    FeatureVector {
        layout: FeatureLayout::Full13,
        values: vec![
            h.chars().count() as f64,
            char_counts(h).len() as f64,
            shannon_entropy(h).unwrap_or(0.0),
            account.followers as f64,
            account.friends as f64,
            account.statuses as f64,
            flag(account.has_description),
            flag(account.has_location),
            flag(account.verified),
            flag(account.geo_enabled),
            urls as f64,
            tags as f64,
            flag(neg > pos),
        ],
    }
}

/// Value of any named feature from either layout.
pub fn feature_value(record: &AccountRecord, name: &str) -> Result<f64> {
    if let Some(i) = FeatureLayout::Full13.index_of(name) {
        return Ok(extract_full13(record).values[i]);
    }
    if let Some(i) = FeatureLayout::Handle5.index_of(name) {
        return Ok(FeatureLayout::Handle5.extract(record).values[i]);
    }
    Err(Error::UnknownFeature(name.to_string()))
}

/// Feature rows paired with the handles they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    pub features: Matrix,
    pub handles: Vec<String>,
}

impl Samples {
    pub fn new(features: Matrix, handles: Vec<String>) -> Self {
        assert_eq!(features.rows(), handles.len(), "feature rows and handles disagree");
        Samples { features, handles }
    }

    pub fn empty(dim: usize) -> Self {
        Samples {
            features: Matrix::zeros(0, dim),
            handles: Vec::new(),
        }
    }

    /// Feature-only samples with placeholder handles.
    pub fn from_features(features: Matrix) -> Self {
        let handles = (0..features.rows()).map(|i| format!("row{i}")).collect();
        Samples { features, handles }
    }

    pub fn from_records(records: &[&AccountRecord], layout: FeatureLayout) -> Self {
        let rows: Vec<Vec<f64>> = records.iter().map(|r| layout.extract(r).values).collect();
        Samples {
            features: Matrix::from_rows(&rows, layout.dim()),
            handles: records.iter().map(|r| r.handle.clone()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.handles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.handles.is_empty()
    }

    pub fn select(&self, idx: &[usize]) -> Samples {
        Samples {
            features: self.features.select_rows(idx),
            handles: idx.iter().map(|&i| self.handles[i].clone()).collect(),
        }
    }

    pub fn concat(&self, other: &Samples) -> Samples {
        let mut handles = self.handles.clone();
        handles.extend(other.handles.iter().cloned());
        Samples {
            features: self.features.vstack(&other.features),
            handles,
        }
    }
}

/// Labeled and unlabeled pools sharing one feature layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub layout: FeatureLayout,
    pub labeled: Samples,
    /// `+1` / `-1`, aligned with `labeled`.
    pub labels: Vec<i8>,
    pub unlabeled: Samples,
}

impl Dataset {
    pub fn new(layout: FeatureLayout, labeled: Samples, labels: Vec<i8>, unlabeled: Samples) -> Self {
        assert_eq!(labeled.len(), labels.len(), "labels must align with labeled rows");
        Dataset {
            layout,
            labeled,
            labels,
            unlabeled,
        }
    }

    /// A fully labeled dataset over raw feature rows.
    pub fn supervised(features: Matrix, labels: Vec<i8>) -> Self {
        let dim = features.cols();
        Dataset {
            layout: if dim == 13 { FeatureLayout::Full13 } else { FeatureLayout::Handle5 },
            labeled: Samples::from_features(features),
            labels,
            unlabeled: Samples::empty(dim),
        }
    }

    pub fn n_labeled(&self) -> usize {
        self.labels.len()
    }

    pub fn n_unlabeled(&self) -> usize {
        self.unlabeled.len()
    }

    pub fn dim(&self) -> usize {
        self.labeled.features.cols()
    }

    /// Same labeled pool, no unlabeled rows.
    pub fn labeled_only(&self) -> Dataset {
        Dataset {
            layout: self.layout,
            labeled: self.labeled.clone(),
            labels: self.labels.clone(),
            unlabeled: Samples::empty(self.dim()),
        }
    }

    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y > 0).count();
        (pos, self.labels.len() - pos)
    }
}
