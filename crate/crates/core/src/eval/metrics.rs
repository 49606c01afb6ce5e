use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
}

impl Confusion {
    pub fn from_labels(truth: &[i8], pred: &[i8]) -> Result<Self> {
        if truth.len() != pred.len() {
            return Err(Error::InvalidInput(format!(
                "{} true labels but {} predictions",
                truth.len(),
                pred.len()
            )));
        }
        let mut c = Confusion::default();
        for (&t, &p) in truth.iter().zip(pred) {
            match (t > 0, p > 0) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn metrics(self) -> Metrics {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Metrics {
            precision,
            recall,
            f1,
            confusion: self,
        }
    }
}

/// Precision, recall and F1 of the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: Confusion,
}

pub fn positive_metrics(truth: &[i8], pred: &[i8]) -> Result<Metrics> {
    Ok(Confusion::from_labels(truth, pred)?.metrics())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let m = Confusion { tp: 3, fp: 1, fn_: 3, tn: 0 }.metrics();
        assert_eq!((m.precision, m.recall), (0.75, 0.5));
        assert!((m.f1 - 0.6).abs() < 1e-15);
        let none = positive_metrics(&[1, -1, 1], &[-1, -1, -1]).unwrap();
        assert_eq!((none.precision, none.recall, none.f1), (0.0, 0.0, 0.0));
        let all = positive_metrics(&[1, -1, 1], &[1, -1, 1]).unwrap();
        assert_eq!((all.precision, all.recall, all.f1), (1.0, 1.0, 1.0));
        assert!(positive_metrics(&[1], &[1, 1]).is_err());
    }

    #[test]
    fn counts_from_labels() {
        let c = Confusion::from_labels(&[1, 1, -1, -1, 1], &[1, -1, 1, -1, 1]).unwrap();
        assert_eq!(c, Confusion { tp: 2, fp: 1, fn_: 1, tn: 1 });
    }
}
