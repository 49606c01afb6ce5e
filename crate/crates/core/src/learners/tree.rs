//! Binary classification trees with the entropy (information gain) criterion.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;

/// Binary entropy in bits of a node holding `pos` positives out of `total`.
pub fn entropy_impurity(pos: f64, total: f64) -> f64 {
    if total <= 0.0 {
        return 0.0;
    }
    let p = pos / total;
    let term = |q: f64| if q > 0.0 { -q * q.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    /// Features examined per split; `None` means all.
    pub max_features: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_features: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        positive_fraction: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<Node>,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn best_split_on(x: &Matrix, y: &[i8], idx: &[usize], feature: usize, parent: f64) -> Option<SplitChoice> {
    let mut vals: Vec<(f64, bool)> = idx.iter().map(|&i| (x.get(i, feature), y[i] > 0)).collect();
    vals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = vals.len() as f64;
    let total_pos = vals.iter().filter(|v| v.1).count() as f64;
    let mut left_pos = 0.0;
    let mut best: Option<SplitChoice> = None;
    for k in 0..vals.len() - 1 {
        if vals[k].1 {
            left_pos += 1.0;
        }
        if vals[k].0 == vals[k + 1].0 {
            continue;
        }
        let nl = (k + 1) as f64;
        let nr = n - nl;
        let gain = parent
            - nl / n * entropy_impurity(left_pos, nl)
            - nr / n * entropy_impurity(total_pos - left_pos, nr);
        if best.as_ref().is_none_or(|b| gain > b.gain) {
            best = Some(SplitChoice {
                feature,
                threshold: 0.5 * (vals[k].0 + vals[k + 1].0),
                gain,
            });
        }
    }
    best
}

impl DecisionTree {
    /// Grows a tree on the rows listed in `idx` (duplicates allowed, as in a
    /// bootstrap sample) until nodes are pure or smaller than `min_samples_split`.
    pub fn fit<R: Rng>(x: &Matrix, y: &[i8], idx: &[usize], params: &TreeParams, rng: &mut R) -> Self {
        let d = x.cols();
        let max_features = params.max_features.unwrap_or(d).clamp(1, d.max(1));
        let mut nodes = vec![Node::Leaf { positive_fraction: 0.0 }];
        let mut stack = vec![(0usize, idx.to_vec())];
        let mut features: Vec<usize> = (0..d).collect();
        while let Some((slot, rows)) = stack.pop() {
            let n = rows.len() as f64;
            let pos = rows.iter().filter(|&&i| y[i] > 0).count() as f64;
            let leaf = Node::Leaf {
                positive_fraction: if n > 0.0 { pos / n } else { 0.0 },
            };
            if pos == 0.0 || pos == n || rows.len() < params.min_samples_split {
                nodes[slot] = leaf;
                continue;
            }
            let parent = entropy_impurity(pos, n);
            features.shuffle(rng);
            let mut best: Option<SplitChoice> = None;
            for (visited, &f) in features.iter().enumerate() {
                // keep looking past max_features only while nothing splits
                if visited >= max_features && best.is_some() {
                    break;
                }
                if let Some(c) = best_split_on(x, y, &rows, f, parent) {
                    if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                        best = Some(c);
                    }
                }
            }
            let Some(split) = best else {
                nodes[slot] = leaf;
                continue;
            };
            let (l, r): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&i| x.get(i, split.feature) <= split.threshold);
            let left = nodes.len();
            nodes.push(Node::Leaf { positive_fraction: 0.0 });
            let right = nodes.len();
            nodes.push(Node::Leaf { positive_fraction: 0.0 });
            nodes[slot] = Node::Split {
                feature: split.feature,
                threshold: split.threshold,
                left,
                right,
            };
            stack.push((right, r));
            stack.push((left, l));
        }
        DecisionTree { nodes }
    }

    /// Positive fraction of the leaf `row` falls into.
    pub fn leaf_value(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                Node::Leaf { positive_fraction } => return *positive_fraction,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> i8 {
        if self.leaf_value(row) > 0.5 {
            1
        } else {
            -1
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}
