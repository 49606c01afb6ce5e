use std::io::Write;

use serde::{Deserialize, Serialize};

use super::FeatureLayout;
use crate::corpus::AccountRecord;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Per-column z-scoring. Columns with zero variance are centered but not
/// scaled, so a constant column becomes all zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows().max(1) as f64;
        let d = x.cols();
        let mut mean = vec![0.0; d];
        for r in x.iter_rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in x.iter_rows() {
            for j in 0..d {
                let c = r[j] - mean[j];
                var[j] += c * c;
            }
        }
        let scale = var
            .iter()
            .map(|v| {
                let sd = (v / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.scale[j];
            }
        }
        out
    }
}

/// Featurized records with their labels in record order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub values: Matrix,
    /// `Some(+1)`, `Some(-1)`, or `None` for unlabeled rows.
    pub labels: Vec<Option<i8>>,
    pub standardizer: Option<Standardizer>,
}

impl FeatureMatrix {
    /// CSV with a header of feature names and a trailing `label` column.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{},label", self.names.join(","))?;
        for (row, label) in self.values.iter_rows().zip(&self.labels) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let label = match label {
                Some(1) => "+1",
                Some(_) => "-1",
                None => "",
            };
            writeln!(w, "{},{}", cells.join(","), label)?;
        }
        w.flush()
    }

    pub fn labeled_rows(&self) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i].is_some()).collect()
    }
}

/// Row `i` is the featurization of `records[i]`. With `standardize`, column
/// statistics come from labeled rows only (all rows if none are labeled)
/// and are applied to every row.
pub fn build_matrix(records: &[AccountRecord], layout: FeatureLayout, standardize: bool) -> Result<FeatureMatrix> {
    if records.is_empty() {
        return Err(Error::InvalidInput("cannot build a feature matrix from zero records".into()));
    }
    let rows: Vec<Vec<f64>> = records.iter().map(|r| layout.extract(r).values).collect();
    let mut values = Matrix::from_rows(&rows, layout.dim());
    let labels: Vec<Option<i8>> = records.iter().map(|r| r.label.sign()).collect();
    let standardizer = if standardize {
        let labeled: Vec<usize> = (0..labels.len()).filter(|&i| labels[i].is_some()).collect();
        let fit_on = if labeled.is_empty() {
            values.clone()
        } else {
            values.select_rows(&labeled)
        };
        let s = Standardizer::fit(&fit_on);
        values = s.transform(&values);
        Some(s)
    } else {
        None
    };
    Ok(FeatureMatrix {
        names: layout.names().into_iter().map(str::to_owned).collect(),
        values,
        labels,
        standardizer,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Label;

    fn recs(handles: &[(&str, Label)]) -> Vec<AccountRecord> {
        handles.iter().map(|(h, l)| AccountRecord::bare(*h, *l)).collect()
    }

    #[test]
    fn shape_and_order() {
        let r = recs(&[("abc", Label::Positive), ("zz9", Label::Unlabeled), ("q", Label::Negative)]);
        let m = build_matrix(&r, FeatureLayout::Handle5, false).unwrap();
        assert_eq!((m.values.rows(), m.values.cols()), (3, 5));
        assert_eq!(m.values.get(0, 0), 3.0);
        assert_eq!(m.values.get(2, 0), 1.0);
        assert_eq!(m.labels, vec![Some(1), None, Some(-1)]);
    }

    #[test]
    fn zero_variance_columns_become_zero() {
        let r = recs(&[("same", Label::Positive)]);
        let mut all = r.clone();
        // identical handle strings are not a valid corpus but are fine for a matrix
        all.push(AccountRecord::bare("same", Label::Negative));
        all.push(AccountRecord::bare("same", Label::Unlabeled));
        let m = build_matrix(&all, FeatureLayout::Handle5, true).unwrap();
        assert!(m.values.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn standardized_labeled_means_are_zero() {
        let r = recs(&[
            ("abc123", Label::Positive),
            ("007bond", Label::Negative),
            ("aabbbc", Label::Positive),
            ("x_y_zz", Label::Negative),
            ("qqqqqqqqqqqq", Label::Unlabeled),
        ]);
        let m = build_matrix(&r, FeatureLayout::Handle5, true).unwrap();
        let lab = m.values.select_rows(&m.labeled_rows());
        for j in 0..5 {
            let col = lab.column(j);
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            assert!(mean.abs() < 1e-9, "column {j} mean {mean}");
        }
        assert!(build_matrix(&[], FeatureLayout::Handle5, false).is_err());
    }

    #[test]
    fn csv_export() {
        let r = recs(&[("ab", Label::Positive), ("c", Label::Unlabeled)]);
        let m = build_matrix(&r, FeatureLayout::Handle5, false).unwrap();
        let mut out = Vec::new();
        m.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "length,max_char_occurrence,unique_chars,leading_digits,complexity,label");
        assert_eq!(lines[1], "2,1,2,0,1,+1");
        assert_eq!(lines[2], "1,1,1,0,0,");
    }
}
