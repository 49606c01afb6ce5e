//! Handle similarity and the test of whether positive handles cluster.
//!
//! Similarity between two handles is the normalized Levenshtein similarity
//! `1 - d(a, b) / max(len a, len b)`. For a set of positive handles `E` and
//! negative handles `N`, `v_e` holds the similarity of every unordered pair
//! in `E` and `v_en` the similarity of every `E x N` pair. The test is a
//! one-sided two-sample t-test of `H1: mean(v_e) > mean(v_en)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label};
use crate::error::{Error, Result};
use crate::stats::{mean_var, student_t_sf};

/// Edit distance with unit-cost insertion, deletion and substitution,
/// counted over Unicode scalar values.
pub fn levenshtein_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

pub fn levenshtein_chars<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `1 - levenshtein(a, b) / max(len a, len b)`, in `[0, 1]`.
pub fn handle_similarity(a: &str, b: &str) -> Result<f64> {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    similarity_chars(&a, &b)
}

fn similarity_chars(a: &[char], b: &[char]) -> Result<f64> {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return Err(Error::InvalidInput("similarity of two empty handles".into()));
    }
    Ok(1.0 - levenshtein_chars(a, b) as f64 / longest as f64)
}

fn prepare(handles: &[&str], case_insensitive: bool) -> Vec<Vec<char>> {
    handles
        .iter()
        .map(|h| {
            if case_insensitive {
                h.to_lowercase().chars().collect()
            } else {
                h.chars().collect()
            }
        })
        .collect()
}

/// Pair-similarity vectors. `v_e` is in lexicographic `(i, j), i < j` order
/// and `v_en` in `(extremist, normal)` row-major order.
pub fn pairwise_vectors(
    extremists: &[&str],
    normals: &[&str],
    case_insensitive: bool,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if extremists.len() < 2 || normals.is_empty() {
        return Err(Error::InvalidInput(format!(
            "need at least 2 positive and 1 negative handle, got {} and {}",
            extremists.len(),
            normals.len()
        )));
    }
    let e = prepare(extremists, case_insensitive);
    let n = prepare(normals, case_insensitive);
    let v_e: Vec<Vec<f64>> = (0..e.len())
        .into_par_iter()
        .map(|i| {
            ((i + 1)..e.len())
                .map(|j| similarity_chars(&e[i], &e[j]))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let v_en: Vec<Vec<f64>> = e
        .par_iter()
        .map(|a| n.iter().map(|b| similarity_chars(a, b)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    Ok((v_e.concat(), v_en.concat()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    /// `H1: mean(x) > mean(y)`
    Greater,
    Less,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceModel {
    /// Unequal variances with Welch-Satterthwaite degrees of freedom.
    Welch,
    /// Pooled variance, `n_x + n_y - 2` degrees of freedom.
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityTestResult {
    pub t_statistic: f64,
    pub p_value: f64,
    pub degrees_of_freedom: f64,
    pub alpha: f64,
    pub reject_h0: bool,
    pub n_e: usize,
    pub n_en: usize,
    pub mean_e: f64,
    pub mean_en: f64,
    pub variance_model: VarianceModel,
    pub alternative: Alternative,
}

impl SimilarityTestResult {
    pub fn summary(&self) -> String {
        format!(
            "{} H0 at alpha={}: t={:.4}, df={:.1}, p={:.3e} (mean_e={:.4} over {} pairs, mean_en={:.4} over {} pairs)",
            if self.reject_h0 { "reject" } else { "fail to reject" },
            self.alpha,
            self.t_statistic,
            self.degrees_of_freedom,
            self.p_value,
            self.mean_e,
            self.n_e,
            self.mean_en,
            self.n_en,
        )
    }
}

pub fn welch_t_test(x: &[f64], y: &[f64], alternative: Alternative, alpha: f64) -> Result<SimilarityTestResult> {
    two_sample_t_test(x, y, alternative, VarianceModel::Welch, alpha)
}

pub fn two_sample_t_test(
    x: &[f64],
    y: &[f64],
    alternative: Alternative,
    model: VarianceModel,
    alpha: f64,
) -> Result<SimilarityTestResult> {
    if x.len() < 2 || y.len() < 2 {
        return Err(Error::DegenerateTest(format!(
            "each sample needs at least 2 values, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let (nx, ny) = (x.len() as f64, y.len() as f64);
    let (mx, vx) = mean_var(x);
    let (my, vy) = mean_var(y);
    if vx == 0.0 && vy == 0.0 {
        return Err(Error::DegenerateTest("both samples have zero variance".into()));
    }
    let (se, df) = match model {
        VarianceModel::Welch => {
            let (a, b) = (vx / nx, vy / ny);
            let df = (a + b).powi(2) / (a * a / (nx - 1.0) + b * b / (ny - 1.0));
            ((a + b).sqrt(), df)
        }
        VarianceModel::Pooled => {
            let df = nx + ny - 2.0;
            let pooled = ((nx - 1.0) * vx + (ny - 1.0) * vy) / df;
            ((pooled * (1.0 / nx + 1.0 / ny)).sqrt(), df)
        }
    };
    let t = (mx - my) / se;
    let p = match alternative {
        Alternative::Greater => student_t_sf(t, df),
        Alternative::Less => student_t_sf(-t, df),
        Alternative::TwoSided => (2.0 * student_t_sf(t.abs(), df)).min(1.0),
    };
    Ok(SimilarityTestResult {
        t_statistic: t,
        p_value: p,
        degrees_of_freedom: df,
        alpha,
        reject_h0: p < alpha,
        n_e: x.len(),
        n_en: y.len(),
        mean_e: mx,
        mean_en: my,
        variance_model: model,
        alternative,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rq1Options {
    pub alpha: f64,
    pub case_insensitive: bool,
    pub variance_model: VarianceModel,
}

impl Default for Rq1Options {
    fn default() -> Self {
        Rq1Options {
            alpha: 0.01,
            case_insensitive: true,
            variance_model: VarianceModel::Welch,
        }
    }
}

/// Tests whether labeled positive handles are more similar to each other
/// than to labeled negative handles.
pub fn rq1_test(corpus: &Corpus, options: &Rq1Options) -> Result<SimilarityTestResult> {
    let pos = corpus.handles_with(Label::Positive);
    let neg = corpus.handles_with(Label::Negative);
    if pos.len() < 2 || neg.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 positive and 2 negative labeled accounts, got {} and {}",
            pos.len(),
            neg.len()
        )));
    }
    let (v_e, v_en) = pairwise_vectors(&pos, &neg, options.case_insensitive)?;
    two_sample_t_test(&v_e, &v_en, Alternative::Greater, options.variance_model, options.alpha)
}
