//! Structural invariants on randomly generated measured trees.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sstree::rtree::{discretize, dm_sample, epo_sample, Edge, FiniteRTree, Relation, RescaleMode};

/// Random tree: parents drawn below the new vertex, positive lengths,
/// optional densities and atoms.
fn arb_tree() -> impl Strategy<Value = FiniteRTree> {
    prop::collection::vec((any::<prop::sample::Index>(), 0.05f64..2.0, prop::option::of(0.0f64..3.0), prop::option::of(0.1f64..1.0)), 1..8)
        .prop_map(|specs| {
            let mut t = FiniteRTree::point();
            for (i, (parent, len, density, atom)) in specs.into_iter().enumerate() {
                let mut edge = Edge::new(len).with_density(density.unwrap_or(0.0));
                if let Some(m) = atom {
                    edge = edge.with_atom(len / 2.0, m);
                }
                t.add_edge(parent.index(i + 1), edge).unwrap();
            }
            t
        })
}

fn normalized(t: &FiniteRTree) -> FiniteRTree {
    t.scale(1.0 / t.total_mass()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_matrices_are_metrics(tree in arb_tree(), seed in any::<u64>()) {
        let tree = normalized(&tree);
        let m = dm_sample(&tree, 6, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        for i in 0..m.size() {
            prop_assert_eq!(m.get(i, i), 0.0);
            for j in 0..m.size() {
                prop_assert_eq!(m.get(i, j), m.get(j, i));
                for k in 0..m.size() {
                    prop_assert!(m.get(i, k) <= m.get(i, j) + m.get(j, k) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn ancestor_relation_is_a_strict_order(tree in arb_tree(), seed in any::<u64>()) {
        let tree = normalized(&tree);
        let s = epo_sample(&tree, 12, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let n = s.size();
        for i in 0..n {
            prop_assert!(!s.precedes(i, i));
            for j in 0..n {
                for k in 0..n {
                    if s.precedes(i, j) && s.precedes(j, k) {
                        prop_assert!(s.precedes(i, k));
                    }
                }
            }
        }
    }

    #[test]
    fn rescaling_multiplies_excess_by_p(tree in arb_tree(), p in 0.05f64..1.0, q in 0.05f64..1.0, horizon in 0.0f64..4.0) {
        for mode in [RescaleMode::ExactSpine, RescaleMode::Horizon(horizon)] {
            let r = tree.rescale(p, q, mode).unwrap();
            let want = p * tree.total_excess();
            prop_assert!((r.total_excess() - want).abs() <= 1e-12 * want.max(1.0));
        }
    }

    #[test]
    fn discretization_never_exceeds_its_points(tree in arb_tree(), seed in any::<u64>()) {
        let d = discretize(&tree, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(!d.is_empty());
        prop_assert_eq!(d.code().vertex_count(), d.len());
    }

    #[test]
    fn truncation_keeps_mass_within_ball(tree in arb_tree(), r in 0.0f64..3.0) {
        let ball = tree.truncate_r(r).unwrap();
        prop_assert!(ball.height() <= r + 1e-12);
        prop_assert!(ball.total_mass() <= tree.total_mass() + 1e-12);
        if r >= tree.height() {
            prop_assert!((ball.total_mass() - tree.total_mass()).abs() < 1e-12);
        }
    }
}
