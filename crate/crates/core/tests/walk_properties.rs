use lart::{DissimilarityMatrix, Multiplex, StationaryDistribution, SupraAdjacency, TransitionMatrix};
use proptest::prelude::*;

fn multiplex_strategy() -> impl Strategy<Value = Multiplex> {
    multiplex_with_layers(1..=3)
}

fn multiplex_with_layers(layers: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Multiplex> {
    (1usize..=12, layers).prop_flat_map(|(n, layers)| {
        let pairs = n * (n - 1) / 2;
        proptest::collection::vec(proptest::bool::weighted(0.3), pairs * layers).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut it = bits.into_iter();
            for k in 0..layers {
                for u in 0..n {
                    for v in u + 1..n {
                        if it.next().unwrap() {
                            edges.push((k, u, v));
                        }
                    }
                }
            }
            Multiplex::from_edges(n, layers, edges).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn powers_are_stochastic_and_reversible(m in multiplex_strategy(), t in 1usize..=6, eps in 0.1f64..=1.0) {
        let sa = SupraAdjacency::build(&m, eps).unwrap();
        let kappa = sa.degrees();
        let tp = TransitionMatrix::new(&sa).power(t);
        let dim = tp.matrix().dim();
        for x in 0..dim {
            let row = tp.matrix().row(x);
            prop_assert!(row.iter().all(|&v| v >= 0.0));
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for y in 0..dim {
                let a = kappa[x] * tp.get(x, y);
                let b = kappa[y] * tp.get(y, x);
                prop_assert!((a - b).abs() <= 1e-9 * a.max(b));
            }
        }
    }

    #[test]
    fn degree_proportional_distribution_is_stationary(m in multiplex_strategy()) {
        let sa = SupraAdjacency::build(&m, 1.0).unwrap();
        let p = StationaryDistribution::new(&sa);
        prop_assert!((p.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.fixed_point_residual(&TransitionMatrix::new(&sa)) < 1e-12);
    }

    #[test]
    fn one_step_never_changes_node_and_layer_together(m in multiplex_strategy()) {
        let n = m.num_nodes();
        let walk = TransitionMatrix::new(&SupraAdjacency::build(&m, 1.0).unwrap());
        for x in 0..walk.dim() {
            for y in 0..walk.dim() {
                if x % n != y % n && x / n != y / n {
                    prop_assert_eq!(walk.get(x, y), 0.0);
                }
            }
        }
    }

    // With at most two layers every cross-layer comparison uses the same
    // block swap, so all rows embed in one Euclidean space.
    #[test]
    fn dissimilarity_is_a_metric_up_to_two_layers(m in multiplex_with_layers(1..=2), t in 1usize..=4) {
        let s = DissimilarityMatrix::new(&TransitionMatrix::new(&SupraAdjacency::build(&m, 1.0).unwrap()).power(t));
        let dim = s.dim();
        for x in 0..dim {
            prop_assert_eq!(s.get(x, x), 0.0);
            for y in 0..dim {
                prop_assert_eq!(s.get(x, y), s.get(y, x));
                prop_assert!(s.get(x, y) >= 0.0);
                for z in 0..dim {
                    prop_assert!(s.get(x, z) <= s.get(x, y) + s.get(y, z) + 1e-9);
                }
            }
        }
    }
}

#[test]
fn three_layer_triples_can_break_the_triangle_inequality() {
    // each pair of layers swaps a different pair of blocks, so no single
    // embedding exists once three layers are involved
    let m = Multiplex::from_edges(3, 3, [(0, 0, 1), (2, 0, 2)]).unwrap();
    let s = DissimilarityMatrix::new(&TransitionMatrix::new(&SupraAdjacency::build(&m, 1.0).unwrap()).power(2));
    let (x, y, z) = (2, 3 + 1, 6 + 1); // (2, layer 0), (1, layer 1), (1, layer 2)
    let excess = s.get(x, y) - s.get(x, z) - s.get(z, y);
    assert!(excess > 1e-3, "excess {excess}");
}
