//! Node-layer dissimilarity from `t`-step transition probabilities.
//!
//! Every node-layer `x` is represented by its row of `P^t`, with entry `y`
//! divided by `√κ_y`. Two replicas in the same layer are compared by the
//! Euclidean distance of these rows. For replicas in layers `k ≠ l`, the
//! layer-`k` block of one row is compared with the layer-`l` block of the
//! other and vice versa (terms `s1`, `s2`); all remaining blocks are compared
//! in place (`s3`).

use rayon::prelude::*;

use crate::error::{LartError, Result};
use crate::matrix::DenseMatrix;
use crate::walk::TransitionPowers;

/// Distance between `(i, k)` and `(j, k)`.
pub fn same_layer_distance(tp: &TransitionPowers, i: usize, j: usize, k: usize) -> f64 {
    let n = tp.num_nodes();
    let (x, y) = (k * n + i, k * n + j);
    if x == y {
        return 0.0;
    }
    let kappa = tp.degrees();
    let sum: f64 = (0..tp.matrix().dim())
        .map(|z| {
            let d = tp.get(x, z) - tp.get(y, z);
            d * d / kappa[z]
        })
        .sum();
    sum.sqrt()
}

/// The three partial sums of the cross-layer distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossLayerTerms {
    /// Own-layer blocks compared with each other.
    pub s1: f64,
    /// Each replica's view of the other's layer.
    pub s2: f64,
    /// All remaining layers, compared in place.
    pub s3: f64,
}

impl CrossLayerTerms {
    pub fn distance(&self) -> f64 {
        (self.s1 + self.s2 + self.s3).sqrt()
    }
}

pub fn cross_layer_terms(
    tp: &TransitionPowers,
    i: usize,
    k: usize,
    j: usize,
    l: usize,
) -> Result<CrossLayerTerms> {
    if k == l {
        return Err(LartError::InvalidArgument(format!(
            "cross-layer distance needs two distinct layers, got {k} twice"
        )));
    }
    let n = tp.num_nodes();
    let kappa = tp.degrees();
    let (x, y) = (k * n + i, l * n + j);
    let mut terms = CrossLayerTerms {
        s1: 0.0,
        s2: 0.0,
        s3: 0.0,
    };
    for h in 0..n {
        let (hk, hl) = (k * n + h, l * n + h);
        let d1 = tp.get(x, hk) / kappa[hk].sqrt() - tp.get(y, hl) / kappa[hl].sqrt();
        let d2 = tp.get(x, hl) / kappa[hl].sqrt() - tp.get(y, hk) / kappa[hk].sqrt();
        terms.s1 += d1 * d1;
        terms.s2 += d2 * d2;
        for m in (0..tp.num_layers()).filter(|&m| m != k && m != l) {
            let hm = m * n + h;
            let d3 = tp.get(x, hm) - tp.get(y, hm);
            terms.s3 += d3 * d3 / kappa[hm];
        }
    }
    Ok(terms)
}

/// Distance between `(i, k)` and `(j, l)` for `k ≠ l`.
pub fn cross_layer_distance(
    tp: &TransitionPowers,
    i: usize,
    k: usize,
    j: usize,
    l: usize,
) -> Result<f64> {
    cross_layer_terms(tp, i, k, j, l).map(|t| t.distance())
}

/// Symmetric `NL x NL` matrix of node-layer distances.
///
/// With one or two layers this is a metric. With three or more, each layer
/// pair swaps its own pair of blocks, and the triangle inequality can fail
/// (rarely, and by small amounts) on triples spanning three layers.
#[derive(Debug, Clone)]
pub struct DissimilarityMatrix {
    t: usize,
    num_nodes: usize,
    num_layers: usize,
    values: DenseMatrix,
}

impl DissimilarityMatrix {
    pub fn new(tp: &TransitionPowers) -> Self {
        let n = tp.num_nodes();
        let layers = tp.num_layers();
        let dim = tp.matrix().dim();

        let inv_sqrt: Vec<f64> = tp.degrees().iter().map(|k| 1.0 / k.sqrt()).collect();
        let mut scaled = tp.matrix().clone();
        for row in scaled.data_mut().chunks_exact_mut(dim.max(1)) {
            for (v, w) in row.iter_mut().zip(&inv_sqrt) {
                *v *= w;
            }
        }

        // upper[x] holds distances to y = x+1..dim
        let upper: Vec<Vec<f64>> = (0..dim)
            .into_par_iter()
            .map(|x| {
                let rx = scaled.row(x);
                let k = x / n;
                ((x + 1)..dim)
                    .map(|y| {
                        let ry = scaled.row(y);
                        let l = y / n;
                        let mut sum = 0.0;
                        for m in 0..layers {
                            let swapped = if m == k {
                                l
                            } else if m == l {
                                k
                            } else {
                                m
                            };
                            let a = &rx[m * n..(m + 1) * n];
                            let b = &ry[swapped * n..(swapped + 1) * n];
                            for (p, q) in a.iter().zip(b) {
                                let d = p - q;
                                sum += d * d;
                            }
                        }
                        sum.sqrt()
                    })
                    .collect()
            })
            .collect();

        let mut values = DenseMatrix::zeros(dim);
        for (x, row) in upper.into_iter().enumerate() {
            for (offset, d) in row.into_iter().enumerate() {
                let y = x + 1 + offset;
                values.set(x, y, d);
                values.set(y, x, d);
            }
        }
        DissimilarityMatrix {
            t: tp.t(),
            num_nodes: n,
            num_layers: layers,
            values,
        }
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_layers(&self) -> usize {
        self.num_layers
    }

    pub fn dim(&self) -> usize {
        self.values.dim()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values.get(x, y)
    }

    pub fn values(&self) -> &DenseMatrix {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiplex::Multiplex;
    use crate::supra::SupraAdjacency;
    use crate::walk::TransitionMatrix;

    fn powers(m: &Multiplex, t: usize) -> TransitionPowers {
        TransitionMatrix::new(&SupraAdjacency::build(m, 1.0).unwrap()).power(t)
    }

    fn toy() -> Multiplex {
        Multiplex::from_edges(
            5,
            3,
            [
                (0, 0, 1),
                (0, 1, 2),
                (0, 3, 4),
                (1, 0, 1),
                (1, 0, 2),
                (1, 2, 3),
                (2, 1, 4),
                (2, 0, 4),
                (2, 2, 3),
            ],
        )
        .unwrap()
    }

    #[test]
    fn identity_case_is_zero() {
        let tp = powers(&toy(), 3);
        assert_eq!(same_layer_distance(&tp, 2, 2, 1), 0.0);
        let s = DissimilarityMatrix::new(&tp);
        for x in 0..s.dim() {
            assert_eq!(s.get(x, x), 0.0);
        }
    }

    #[test]
    fn interchangeable_nodes_are_at_distance_zero() {
        // 1 and 2 are adjacent with the same closed neighborhood {0, 1, 2},
        // so with ε = 1 their one-step rows coincide
        let m = Multiplex::from_edges(4, 1, [(0, 0, 1), (0, 0, 2), (0, 1, 2), (0, 0, 3)]).unwrap();
        for t in 1..=4 {
            let tp = powers(&m, t);
            assert_eq!(same_layer_distance(&tp, 1, 2, 0), 0.0);
        }
    }

    #[test]
    fn swapped_leaves_are_not_at_distance_zero() {
        // an automorphism alone is not enough: each leaf keeps its own
        // self-loop mass
        let m = Multiplex::from_edges(3, 1, [(0, 0, 1), (0, 0, 2)]).unwrap();
        let tp = powers(&m, 3);
        assert!(same_layer_distance(&tp, 1, 2, 0) > 0.1);
    }

    #[test]
    fn identical_layers_put_replicas_at_distance_zero() {
        let edges = [(0, 1), (1, 2), (2, 3), (0, 2)];
        let m = Multiplex::from_edges(
            4,
            2,
            edges.iter().flat_map(|&(u, v)| [(0, u, v), (1, u, v)]),
        )
        .unwrap();
        let tp = powers(&m, 2);
        for i in 0..4 {
            let terms = cross_layer_terms(&tp, i, 0, i, 1).unwrap();
            assert!(terms.s1 < 1e-30 && terms.s2 < 1e-30);
            assert_eq!(terms.s3, 0.0);
        }
    }

    #[test]
    fn two_layers_have_no_s3() {
        let m = Multiplex::from_edges(3, 2, [(0, 0, 1), (1, 1, 2)]).unwrap();
        let tp = powers(&m, 2);
        assert_eq!(cross_layer_terms(&tp, 0, 0, 2, 1).unwrap().s3, 0.0);
    }

    #[test]
    fn same_layer_request_is_rejected() {
        let tp = powers(&toy(), 1);
        assert!(cross_layer_distance(&tp, 0, 1, 2, 1).is_err());
    }

    #[test]
    fn matrix_agrees_with_pairwise_functions() {
        let tp = powers(&toy(), 3);
        let s = DissimilarityMatrix::new(&tp);
        let n = 5;
        for x in 0..15 {
            for y in 0..15 {
                let (i, k) = (x % n, x / n);
                let (j, l) = (y % n, y / n);
                let expected = if k == l {
                    same_layer_distance(&tp, i, j, k)
                } else {
                    cross_layer_distance(&tp, i, k, j, l).unwrap()
                };
                assert!((s.get(x, y) - expected).abs() < 1e-12);
                assert_eq!(s.get(x, y), s.get(y, x));
            }
        }
    }

    #[test]
    fn cross_layer_distance_is_symmetric_under_swap() {
        let tp = powers(&toy(), 2);
        let a = cross_layer_distance(&tp, 1, 0, 3, 2).unwrap();
        let b = cross_layer_distance(&tp, 3, 2, 1, 0).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn doubled_layer_cross_terms_reduce_to_same_layer_distance() {
        // With two identical layers the replica (j, 1) sees the world exactly
        // as (j, 0) does with the layers swapped, so comparing (i, 0) to
        // (j, 1) through s1 + s2 matches comparing (i, 0) to (j, 0) directly.
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (1, 3)];
        let m = Multiplex::from_edges(
            5,
            2,
            edges.iter().flat_map(|&(u, v)| [(0, u, v), (1, u, v)]),
        )
        .unwrap();
        let tp = powers(&m, 3);
        for i in 0..5 {
            for j in 0..5 {
                let same = same_layer_distance(&tp, i, j, 0);
                let cross = cross_layer_distance(&tp, i, 0, j, 1).unwrap();
                assert!((same - cross).abs() < 1e-12, "{i} {j}: {same} vs {cross}");
            }
        }
    }
}
