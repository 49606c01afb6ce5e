use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::stats::fsum;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chi2Row {
    pub feature: String,
    pub statistic: f64,
    /// Amount added to the column to make it non-negative, if any.
    pub shifted_by: Option<f64>,
    /// The column summed to zero, so the statistic is 0 by convention.
    pub all_zero: bool,
}

/// Per-feature chi-squared statistics, highest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chi2Table {
    pub rows: Vec<Chi2Row>,
}

/// Class-sum chi-squared: for each feature, `O_c` is the feature mass in
/// class `c`, `E_c = total * n_c / n`, and the statistic is
/// `sum_c (O_c - E_c)^2 / E_c` over classes with `E_c > 0`. Columns with
/// negative values are shifted so their minimum is zero.
pub fn chi2_significance(x: &Matrix, labels: &[i8], names: &[String]) -> Result<Chi2Table> {
    if x.rows() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} rows but {} labels",
            x.rows(),
            labels.len()
        )));
    }
    if names.len() != x.cols() {
        return Err(Error::InvalidInput(format!("{} names for {} columns", names.len(), x.cols())));
    }
    if labels.is_empty() {
        return Err(Error::InvalidInput("chi-squared needs labeled rows".into()));
    }
    let n = labels.len() as f64;
    let n_pos = labels.iter().filter(|&&y| y > 0).count() as f64;
    let mut rows = Vec::with_capacity(x.cols());
    for (j, name) in names.iter().enumerate() {
        let mut col = x.column(j);
        let min = col.iter().copied().fold(f64::INFINITY, f64::min);
        let shifted_by = (min < 0.0).then(|| -min);
        if let Some(s) = shifted_by {
            col.iter_mut().for_each(|v| *v += s);
        }
        let o_pos = fsum(col.iter().zip(labels).filter(|(_, &y)| y > 0).map(|(v, _)| *v));
        let o_neg = fsum(col.iter().zip(labels).filter(|(_, &y)| y <= 0).map(|(v, _)| *v));
        let total = fsum([o_pos, o_neg]);
        let mut statistic = 0.0;
        for (o, n_c) in [(o_pos, n_pos), (o_neg, n - n_pos)] {
            let e = total * n_c / n;
            if e > 0.0 {
                statistic += (o - e) * (o - e) / e;
            }
        }
        rows.push(Chi2Row {
            feature: name.clone(),
            statistic,
            shifted_by,
            all_zero: total == 0.0,
        });
    }
    rows.sort_by(|a, b| b.statistic.total_cmp(&a.statistic));
    Ok(Chi2Table { rows })
}

impl Chi2Table {
    pub fn get(&self, feature: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.feature == feature).map(|r| r.statistic)
    }

    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.feature.len()).max().unwrap_or(0).max(7);
        let mut out = format!("{:<width$}  {:>12}\n", "Feature", "Chi2");
        for r in &self.rows {
            let mut line = format!("{:<width$}  {:>12.4}", r.feature, r.statistic);
            if let Some(s) = r.shifted_by {
                line.push_str(&format!("  (shifted by {s})"));
            }
            if r.all_zero {
                line.push_str("  (all zero)");
            }
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

/// Nonzero counts per feature among labeled and unlabeled rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrequencyRow {
    pub feature: String,
    pub labeled: usize,
    pub unlabeled: usize,
}

pub fn feature_frequency_report(x: &Matrix, is_labeled: &[bool], names: &[String]) -> Result<Vec<FrequencyRow>> {
    if x.rows() != is_labeled.len() || names.len() != x.cols() {
        return Err(Error::InvalidInput("frequency report inputs disagree in shape".into()));
    }
    Ok(names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mut row = FrequencyRow {
                feature: name.clone(),
                labeled: 0,
                unlabeled: 0,
            };
            for (i, &lab) in is_labeled.iter().enumerate() {
                if x.get(i, j) != 0.0 {
                    if lab {
                        row.labeled += 1;
                    } else {
                        row.unlabeled += 1;
                    }
                }
            }
            row
        })
        .collect())
}

pub fn frequency_text(rows: &[FrequencyRow]) -> String {
    let width = rows.iter().map(|r| r.feature.len()).max().unwrap_or(0).max(7);
    let mut out = format!("{:<width$}  {:>8}  {:>10}\n", "Feature", "Labeled", "Unlabeled");
    for r in rows {
        out.push_str(&format!("{:<width$}  {:>8}  {:>10}\n", r.feature, r.labeled, r.unlabeled));
    }
    out
}
