//! Supra-adjacency construction.
//!
//! The supra-adjacency of a multiplex is the `NL x NL` block matrix whose
//! diagonal blocks are the layer adjacencies and whose off-diagonal blocks
//! are diagonal coupling matrices between replicas of the same node. Two
//! variants are kept: the raw matrix, and the regularized one with `ε` added
//! to the main diagonal of every block.

use serde::{Deserialize, Serialize};

use crate::error::{LartError, Result};
use crate::multiplex::Multiplex;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_unstable_by_key(|&(c, _)| c);
            for (c, v) in row {
                cols.push(c);
                values.push(v);
            }
            row_ptr.push(cols.len());
        }
        SparseMatrix {
            dim,
            row_ptr,
            cols,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Stored entries of row `x` as `(column, value)`, columns ascending.
    pub fn row(&self, x: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[x]..self.row_ptr[x + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        let range = self.row_ptr[x]..self.row_ptr[x + 1];
        match self.cols[range.clone()].binary_search(&y) {
            Ok(pos) => self.values[range.start + pos],
            Err(_) => 0.0,
        }
    }

    pub fn row_sum(&self, x: usize) -> f64 {
        self.row(x).map(|(_, v)| v).sum()
    }

    /// Copy with row `x` divided by `divisors[x]`.
    pub(crate) fn divide_rows(&self, divisors: &[f64]) -> SparseMatrix {
        let mut out = self.clone();
        for x in 0..self.dim {
            for v in &mut out.values[self.row_ptr[x]..self.row_ptr[x + 1]] {
                *v /= divisors[x];
            }
        }
        out
    }

    /// Row-major dense copy, for tests and small dumps.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.dim]; self.dim];
        for (x, row) in out.iter_mut().enumerate() {
            for (y, v) in self.row(x) {
                row[y] = v;
            }
        }
        out
    }
}

/// How replicas of the same node are coupled across layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "omega")]
pub enum Coupling {
    /// `ω_{i;kl}` = number of common neighbors of node `i` in layers `k` and `l`.
    Adaptive,
    /// Every `ω_{i;kl}` is the same constant.
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct SupraAdjacency {
    num_nodes: usize,
    num_layers: usize,
    epsilon: f64,
    coupling: Coupling,
    raw: SparseMatrix,
    regularized: SparseMatrix,
    degrees: Vec<f64>,
}

impl SupraAdjacency {
    /// Builds the supra-adjacency with locally adaptive inter-layer weights.
    pub fn build(m: &Multiplex, epsilon: f64) -> Result<Self> {
        Self::build_with(m, Coupling::Adaptive, epsilon)
    }

    /// Builds the supra-adjacency with the constant coupling `omega`.
    pub fn build_fixed(m: &Multiplex, omega: f64, epsilon: f64) -> Result<Self> {
        Self::build_with(m, Coupling::Fixed(omega), epsilon)
    }

    pub fn build_with(m: &Multiplex, coupling: Coupling, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(LartError::InvalidArgument(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        if let Coupling::Fixed(omega) = coupling {
            if !(omega >= 0.0 && omega.is_finite()) {
                return Err(LartError::InvalidArgument(format!(
                    "fixed omega must be a finite non-negative number, got {omega}"
                )));
            }
        }

        let n = m.num_nodes();
        let layers = m.num_layers();
        let size = n * layers;
        let mut raw_rows = Vec::with_capacity(size);
        let mut reg_rows = Vec::with_capacity(size);

        for k in 0..layers {
            for i in 0..n {
                let mut raw_row = Vec::with_capacity(m.degree(k, i) + layers - 1);
                let mut reg_row = Vec::with_capacity(m.degree(k, i) + layers);
                for &j in m.neighbors(k, i) {
                    raw_row.push((k * n + j, 1.0));
                    reg_row.push((k * n + j, 1.0));
                }
                reg_row.push((k * n + i, epsilon));
                for l in (0..layers).filter(|&l| l != k) {
                    let omega = match coupling {
                        Coupling::Adaptive => crate::multiplex::sorted_intersection_len(
                            m.neighbors(k, i),
                            m.neighbors(l, i),
                        ) as f64,
                        Coupling::Fixed(w) => w,
                    };
                    if omega > 0.0 {
                        raw_row.push((l * n + i, omega));
                    }
                    reg_row.push((l * n + i, omega + epsilon));
                }
                raw_rows.push(raw_row);
                reg_rows.push(reg_row);
            }
        }

        let raw = SparseMatrix::from_rows(raw_rows);
        let regularized = SparseMatrix::from_rows(reg_rows);
        let degrees = (0..size).map(|x| regularized.row_sum(x)).collect();
        Ok(SupraAdjacency {
            num_nodes: n,
            num_layers: layers,
            epsilon,
            coupling,
            raw,
            regularized,
            degrees,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    /// `N * L`.
    pub fn size(&self) -> usize {
        self.num_nodes * self.num_layers
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    /// The unregularized matrix `A*`.
    pub fn raw(&self) -> &SparseMatrix {
        &self.raw
    }

    /// `A*` with `ε` on the main diagonal of every block.
    pub fn regularized(&self) -> &SparseMatrix {
        &self.regularized
    }

    /// Multiplex degrees `κ`, the row sums of the regularized matrix.
    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Raw inter-layer weight between replicas `(node, k)` and `(node, l)`.
    pub fn omega(&self, node: usize, k: usize, l: usize) -> f64 {
        self.raw.get(k * self.num_nodes + node, l * self.num_nodes + node)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_symmetric(m: &SparseMatrix) {
        for x in 0..m.dim() {
            for (y, v) in m.row(x) {
                assert_eq!(m.get(y, x), v, "asymmetric at ({x},{y})");
            }
        }
    }

    fn assert_offdiagonal_blocks_diagonal(m: &SparseMatrix, n: usize) {
        for x in 0..m.dim() {
            for (y, _) in m.row(x) {
                if x / n != y / n {
                    assert_eq!(x % n, y % n, "coupling between non-corresponding nodes");
                }
            }
        }
    }

    fn toy() -> Multiplex {
        Multiplex::from_edges(
            4,
            3,
            [
                (0, 0, 1),
                (0, 1, 2),
                (0, 2, 3),
                (1, 0, 1),
                (1, 0, 2),
                (1, 1, 2),
                (2, 2, 3),
                (2, 0, 3),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_node_two_layers() {
        let m = Multiplex::empty(1, 2).unwrap();
        let sa = SupraAdjacency::build(&m, 1.0).unwrap();
        assert_eq!(sa.regularized().to_dense(), vec![vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(sa.degrees(), &[2.0, 2.0]);
        assert_eq!(sa.raw().nnz(), 0);
    }

    #[test]
    fn fixed_single_node_two_layers() {
        let m = Multiplex::empty(1, 2).unwrap();
        let sa = SupraAdjacency::build_fixed(&m, 1.0, 1.0).unwrap();
        assert_eq!(sa.regularized().to_dense(), vec![vec![1.0, 2.0], vec![2.0, 1.0]]);
    }

    #[test]
    fn fixed_zero_omega_leaves_only_epsilon_coupling() {
        let sa = SupraAdjacency::build_fixed(&toy(), 0.0, 0.5).unwrap();
        let n = 4;
        for i in 0..n {
            for k in 0..3 {
                for l in (0..3).filter(|&l| l != k) {
                    assert_eq!(sa.regularized().get(k * n + i, l * n + i), 0.5);
                    assert_eq!(sa.omega(i, k, l), 0.0);
                }
            }
        }
    }

    #[test]
    fn identical_layers_give_degree_times_layers() {
        // node 0 has degree 2 in each of 3 identical layers
        let edges = [(0, 1), (0, 2), (1, 3)];
        let m = Multiplex::from_edges(
            4,
            3,
            edges.iter().flat_map(|&(u, v)| (0..3).map(move |k| (k, u, v))),
        )
        .unwrap();
        let sa = SupraAdjacency::build(&m, 1.0).unwrap();
        for k in 0..3 {
            for i in 0..4 {
                let d = m.degree(k, i) as f64;
                assert_eq!(sa.degrees()[k * 4 + i], (d + 1.0) * 3.0);
            }
        }
    }

    #[test]
    fn structure_invariants() {
        let m = toy();
        for sa in [
            SupraAdjacency::build(&m, 1.0).unwrap(),
            SupraAdjacency::build(&m, 0.3).unwrap(),
            SupraAdjacency::build_fixed(&m, 2.0, 1.0).unwrap(),
        ] {
            assert_symmetric(sa.raw());
            assert_symmetric(sa.regularized());
            assert_offdiagonal_blocks_diagonal(sa.raw(), 4);
            assert_offdiagonal_blocks_diagonal(sa.regularized(), 4);
            for x in 0..sa.size() {
                assert!(sa.regularized().get(x, x) >= sa.epsilon());
                assert!(sa.degrees()[x] >= sa.epsilon() * 3.0);
            }
        }
    }

    #[test]
    fn degrees_follow_closed_form() {
        let m = toy();
        let eps = 0.25;
        let sa = SupraAdjacency::build(&m, eps).unwrap();
        for k in 0..3 {
            for i in 0..4 {
                let mut expected = m.degree(k, i) as f64 + eps;
                for l in (0..3).filter(|&l| l != k) {
                    expected += m.interlayer_weight(i, k, l).unwrap() as f64 + eps;
                }
                assert!((sa.degrees()[k * 4 + i] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_epsilon_and_omega() {
        let m = toy();
        for eps in [0.0, -1.0, 1.5, f64::NAN] {
            assert!(SupraAdjacency::build(&m, eps).is_err());
        }
        assert!(SupraAdjacency::build_fixed(&m, -0.1, 1.0).is_err());
    }
}
