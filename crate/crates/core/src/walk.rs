//! Random walk on the regularized supra-adjacency.
//!
//! One step from node-layer `x` moves to `y` with probability
//! `A[x][y] / κ[x]`, so the walker can stay put, move to a neighbor in its
//! layer, or jump to its own replica in another layer. It never moves to a
//! different node in a different layer in a single step.

use log::warn;
use rayon::prelude::*;

use crate::matrix::DenseMatrix;
use crate::supra::{SparseMatrix, SupraAdjacency};

/// One-step transition matrix `P = D⁻¹A`.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    num_nodes: usize,
    num_layers: usize,
    matrix: SparseMatrix,
    degrees: Vec<f64>,
}

impl TransitionMatrix {
    pub fn new(sa: &SupraAdjacency) -> Self {
        TransitionMatrix {
            num_nodes: sa.num_nodes(),
            num_layers: sa.num_layers(),
            matrix: sa.regularized().divide_rows(sa.degrees()),
            degrees: sa.degrees().to_vec(),
        }
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.matrix.get(x, y)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// `P^t`, computed by `t - 1` sparse-times-dense products.
    ///
    /// `t = 0` yields the identity; distances built from it are meaningless,
    /// so a warning is logged.
    pub fn power(&self, t: usize) -> TransitionPowers {
        let dim = self.dim();
        let matrix = if t == 0 {
            warn!("walk length t = 0 requested; returning the identity matrix");
            DenseMatrix::identity(dim)
        } else {
            let mut current = DenseMatrix::zeros(dim);
            for x in 0..dim {
                for (y, v) in self.matrix.row(x) {
                    current.set(x, y, v);
                }
            }
            let mut next = DenseMatrix::zeros(dim);
            for _ in 1..t {
                self.left_multiply_into(&current, &mut next);
                std::mem::swap(&mut current, &mut next);
            }
            current
        };
        TransitionPowers {
            t,
            num_nodes: self.num_nodes,
            num_layers: self.num_layers,
            matrix,
            degrees: self.degrees.clone(),
        }
    }

    /// `out = P * rhs`. Each output row accumulates in column order of `P`.
    fn left_multiply_into(&self, rhs: &DenseMatrix, out: &mut DenseMatrix) {
        let dim = self.dim();
        if dim == 0 {
            return;
        }
        out.data_mut()
            .par_chunks_mut(dim)
            .enumerate()
            .for_each(|(x, out_row)| {
                out_row.fill(0.0);
                for (y, p) in self.matrix.row(x) {
                    for (o, r) in out_row.iter_mut().zip(rhs.row(y)) {
                        *o += p * r;
                    }
                }
            });
    }
}

/// `P^t` together with the degrees of the walk that produced it.
#[derive(Debug, Clone)]
pub struct TransitionPowers {
    t: usize,
    num_nodes: usize,
    num_layers: usize,
    matrix: DenseMatrix,
    degrees: Vec<f64>,
}

impl TransitionPowers {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    /// Probability of reaching `y` from `x` in exactly `t` steps.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.matrix.get(x, y)
    }
}

/// Degree-proportional stationary distribution `p* = κ / Σκ`.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    probs: Vec<f64>,
}

impl StationaryDistribution {
    pub fn new(sa: &SupraAdjacency) -> Self {
        let total: f64 = sa.degrees().iter().sum();
        StationaryDistribution {
            probs: sa.degrees().iter().map(|k| k / total).collect(),
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `‖p*P − p*‖_∞`.
    pub fn fixed_point_residual(&self, p: &TransitionMatrix) -> f64 {
        let mut image = vec![0.0; self.probs.len()];
        for (x, &px) in self.probs.iter().enumerate() {
            for (y, v) in p.matrix().row(x) {
                image[y] += px * v;
            }
        }
        image
            .iter()
            .zip(&self.probs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
