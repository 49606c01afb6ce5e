//! Kernels, nearest-neighbor search and affinity graphs.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{squared_distance, CsrMatrix, Matrix};

/// RBF affinities below this are dropped from sparse graphs.
pub const RBF_CUTOFF: f64 = 1e-12;

#[inline]
pub fn rbf_kernel(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    (-gamma * squared_distance(a, b)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum AffinityKernel {
    Rbf { gamma: f64 },
    Knn { k: usize },
}

fn by_distance(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Indices of the `k` rows of `points` nearest to `query`, nearest first.
/// Equal distances are broken by row order. `exclude` skips one row.
pub fn nearest(points: &Matrix, query: &[f64], k: usize, exclude: Option<usize>) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = (0..points.rows())
        .filter(|&j| Some(j) != exclude)
        .map(|j| (squared_distance(points.row(j), query), j))
        .collect();
    let k = k.min(d.len());
    if k == 0 {
        return Vec::new();
    }
    if k < d.len() {
        d.select_nth_unstable_by(k - 1, by_distance);
        d.truncate(k);
    }
    d.sort_by(by_distance);
    d.into_iter().map(|(_, j)| j).collect()
}

/// Directed kNN lists: row `i` holds the `k` nearest other rows.
pub fn knn_lists(x: &Matrix, k: usize) -> Vec<Vec<usize>> {
    (0..x.rows())
        .into_par_iter()
        .map(|i| nearest(x, x.row(i), k, Some(i)))
        .collect()
}

/// Binary symmetrized kNN affinity: `W = max(A, A^T)` for directed adjacency `A`.
pub fn knn_affinity(x: &Matrix, k: usize) -> CsrMatrix {
    let lists = knn_lists(x, k);
    let n = x.rows();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, nbrs) in lists.iter().enumerate() {
        for &j in nbrs {
            rows[i].push((j, 1.0));
            rows[j].push((i, 1.0));
        }
    }
    for r in rows.iter_mut() {
        r.sort_by_key(|&(j, _)| j);
        r.dedup_by_key(|&mut (j, _)| j);
    }
    CsrMatrix::from_row_lists(n, rows)
}

/// RBF affinity with a zero diagonal; entries below [`RBF_CUTOFF`] are dropped.
pub fn rbf_affinity(x: &Matrix, gamma: f64) -> CsrMatrix {
    let n = x.rows();
    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .filter_map(|j| {
                    let w = rbf_kernel(x.row(i), x.row(j), gamma);
                    (w > RBF_CUTOFF).then_some((j, w))
                })
                .collect()
        })
        .collect();
    CsrMatrix::from_row_lists(n, rows)
}

/// Pairwise kernel values over a set of rows.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelGram {
    pub kind: AffinityKernel,
    pub matrix: Matrix,
}

impl KernelGram {
    /// Dense Gram matrix. RBF includes the unit diagonal; kNN holds the
    /// directed adjacency, so each row has exactly `k` ones off the diagonal.
    pub fn build(x: &Matrix, kind: AffinityKernel) -> Self {
        let n = x.rows();
        let mut m = Matrix::zeros(n, n);
        match kind {
            AffinityKernel::Rbf { gamma } => {
                for i in 0..n {
                    for j in 0..n {
                        m.set(i, j, rbf_kernel(x.row(i), x.row(j), gamma));
                    }
                }
            }
            AffinityKernel::Knn { k } => {
                for (i, nbrs) in knn_lists(x, k).into_iter().enumerate() {
                    for j in nbrs {
                        m.set(i, j, 1.0);
                    }
                }
            }
        }
        KernelGram { kind, matrix: m }
    }
}

/// Builds the sparse affinity used by the graph learners.
pub fn affinity(x: &Matrix, kind: AffinityKernel) -> CsrMatrix {
    match kind {
        AffinityKernel::Rbf { gamma } => rbf_affinity(x, gamma),
        AffinityKernel::Knn { k } => knn_affinity(x, k),
    }
}

/// `D^{-1/2} W D^{-1/2}`; rows and columns of isolated nodes stay zero.
pub fn symmetric_normalize(w: &CsrMatrix) -> CsrMatrix {
    let inv_sqrt: Vec<f64> = (0..w.n_rows())
        .map(|i| {
            let d = w.row_sum(i);
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let mut s = w.clone();
    s.map_values(|i, j, v| v * inv_sqrt[i] * inv_sqrt[j]);
    s
}

/// Unnormalized graph Laplacian `L = D - W`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphLaplacian {
    pub affinity: CsrMatrix,
    pub degree: Vec<f64>,
}

impl GraphLaplacian {
    pub fn new(affinity: CsrMatrix) -> Self {
        let degree = (0..affinity.n_rows()).map(|i| affinity.row_sum(i)).collect();
        GraphLaplacian { affinity, degree }
    }

    pub fn n_nodes(&self) -> usize {
        self.degree.len()
    }

    /// `L s`.
    pub fn apply(&self, s: &[f64]) -> Vec<f64> {
        let ws = self.affinity.mul_vec(s);
        self.degree
            .iter()
            .zip(s)
            .zip(ws)
            .map(|((d, si), wsi)| d * si - wsi)
            .collect()
    }

    /// `s^T L s`.
    pub fn quadratic_form(&self, s: &[f64]) -> f64 {
        s.iter().zip(self.apply(s)).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = self.affinity.to_dense();
        for i in 0..self.n_nodes() {
            for j in 0..self.n_nodes() {
                let v = if i == j { self.degree[i] } else { 0.0 } - m.get(i, j);
                m.set(i, j, v);
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(n: usize, d: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        Matrix::from_vec(n, d, data)
    }

    #[test]
    fn rbf_gram_properties() {
        let x = random_points(15, 3, 4);
        let g = KernelGram::build(&x, AffinityKernel::Rbf { gamma: 2.0 });
        let m = nalgebra::DMatrix::from_fn(15, 15, |i, j| g.matrix.get(i, j));
        for i in 0..15 {
            assert_eq!(m[(i, i)], 1.0);
            for j in 0..15 {
                assert_eq!(m[(i, j)], m[(j, i)]);
                assert!(m[(i, j)] > 0.0 && m[(i, j)] <= 1.0);
            }
        }
        let eig = m.symmetric_eigenvalues();
        assert!(eig.iter().all(|&e| e >= -1e-8), "{eig:?}");
    }

    #[test]
    fn knn_gram_rows_have_k_entries() {
        let x = random_points(30, 2, 9);
        let g = KernelGram::build(&x, AffinityKernel::Knn { k: 5 });
        for i in 0..30 {
            let row: Vec<f64> = (0..30).map(|j| g.matrix.get(i, j)).collect();
            assert_eq!(row[i], 0.0);
            assert_eq!(row.iter().filter(|&&v| v != 0.0).count(), 5);
        }
        let w = knn_affinity(&x, 5);
        for i in 0..30 {
            assert!(w.row(i).count() >= 5);
            for (j, v) in w.row(i) {
                assert_eq!(w.get(j, i), v);
            }
        }
    }

    #[test]
    fn nearest_matches_brute_force_with_ties() {
        let x = Matrix::from_rows(&[[0.0], [1.0], [-1.0], [2.0], [1.0]], 1);
        // rows 1, 2 and 4 are all at distance 1; row order breaks the tie
        assert_eq!(nearest(&x, &[0.0], 3, None), vec![0, 1, 2]);
        assert_eq!(nearest(&x, &[0.0], 3, Some(0)), vec![1, 2, 4]);
        assert_eq!(nearest(&x, &[0.0], 10, None).len(), 5);
    }

    #[test]
    fn laplacian_identity_and_psd() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 12;
            let mut rows = vec![Vec::new(); n];
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random_bool(0.3) {
                        let w = rng.random_range(0.1..2.0);
                        rows[i].push((j, w));
                        rows[j].push((i, w));
                    }
                }
            }
            let lap = GraphLaplacian::new(CsrMatrix::from_row_lists(n, rows));
            let s: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mut half_sum = 0.0;
            for i in 0..n {
                for (j, w) in lap.affinity.row(i) {
                    half_sum += 0.5 * w * (s[i] - s[j]).powi(2);
                }
            }
            let q = lap.quadratic_form(&s);
            assert!((q - half_sum).abs() < 1e-9 * (1.0 + q.abs()));
            assert!(q >= -1e-12);
            let ones = vec![1.0; n];
            assert!(lap.apply(&ones).iter().all(|v| v.abs() < 1e-12));
        }
    }
}
