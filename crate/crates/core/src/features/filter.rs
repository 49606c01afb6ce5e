use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{feature_value, FeatureLayout};
use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompareOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
}

impl CompareOp {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            CompareOp::Lt => lhs < rhs,
            CompareOp::Le => lhs <= rhs,
            CompareOp::Gt => lhs > rhs,
            CompareOp::Ge => lhs >= rhs,
            CompareOp::Eq => lhs == rhs,
        }
    }
}

impl FromStr for CompareOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "<" => CompareOp::Lt,
            "<=" | "≤" => CompareOp::Le,
            ">" => CompareOp::Gt,
            ">=" | "≥" => CompareOp::Ge,
            "=" | "==" => CompareOp::Eq,
            _ => return Err(Error::Config(format!("unknown comparison operator {s:?}"))),
        })
    }
}

impl fmt::Display for CompareOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
            CompareOp::Eq => "=",
        })
    }
}

/// `feature op threshold`, e.g. `hashtag_count >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRule {
    pub feature: String,
    pub op: CompareOp,
    pub threshold: f64,
}

impl FromStr for FilterRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let [feature, op, threshold] = parts.as_slice() else {
            return Err(Error::Config(format!("filter rule {s:?} is not `feature op threshold`")));
        };
        let threshold = threshold
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad threshold in filter rule {s:?}")))?;
        Ok(FilterRule {
            feature: feature.to_string(),
            op: op.parse()?,
            threshold,
        })
    }
}

impl fmt::Display for FilterRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.feature, self.op, self.threshold)
    }
}

/// One rule per line; blank lines and `#` comments are ignored.
pub fn parse_rules(text: &str) -> Result<Vec<FilterRule>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::parse)
        .collect()
}

fn known_feature(name: &str) -> bool {
    FeatureLayout::Full13.index_of(name).is_some() || FeatureLayout::Handle5.index_of(name).is_some()
}

/// Keeps records satisfying every rule. Labeled records are always kept.
pub fn filter_candidates(corpus: &Corpus, rules: &[FilterRule]) -> Result<Corpus> {
    if let Some(bad) = rules.iter().find(|r| !known_feature(&r.feature)) {
        return Err(Error::UnknownFeature(bad.feature.clone()));
    }
    let mut records = Vec::with_capacity(corpus.len());
    for r in &corpus.records {
        let mut keep = true;
        if !r.label.is_labeled() {
            for rule in rules {
                if !rule.op.holds(feature_value(r, &rule.feature)?, rule.threshold) {
                    keep = false;
                    break;
                }
            }
        }
        if keep {
            records.push(r.clone());
        }
    }
    Ok(Corpus {
        records,
        provenance: corpus.provenance,
    })
}
