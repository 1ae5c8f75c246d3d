use graphtv::random::random_connected_graph;
use graphtv::{
    divergence, sign_pattern, subdifferential_membership, total_variation, EdgeField, OrientedGraph, Tolerances,
    VertexField,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph_and_len() -> impl Strategy<Value = OrientedGraph> {
    (2usize..12, 0.0f64..0.6, any::<u64>()).prop_map(|(n, extra, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_connected_graph(&mut rng, n, extra)
    })
}

fn graph_with_edge_values() -> impl Strategy<Value = (OrientedGraph, Vec<f64>)> {
    graph_and_len().prop_flat_map(|g| {
        let m = g.edge_count();
        (Just(g), prop::collection::vec(-1e3f64..1e3, m))
    })
}

fn graph_with_vertex_values(lo: f64, hi: f64) -> impl Strategy<Value = (OrientedGraph, Vec<f64>)> {
    graph_and_len().prop_flat_map(move |g| {
        let n = g.vertex_count();
        (Just(g), prop::collection::vec(lo..hi, n))
    })
}

/// Dense signed incidence matrix: row v, column e has +1 at the head and −1
/// at the tail.
fn incidence(g: &OrientedGraph) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; g.edge_count()]; g.vertex_count()];
    for (e, &(t, h)) in g.edges().iter().enumerate() {
        a[h][e] += 1.0;
        a[t][e] -= 1.0;
    }
    a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn divergence_matches_incidence_and_sums_to_zero((g, h) in graph_with_edge_values()) {
        let field = EdgeField::new(h.clone()).unwrap();
        let div = divergence(&g, &field).unwrap();
        let a = incidence(&g);
        for v in 0..g.vertex_count() {
            let expected: f64 = a[v].iter().zip(&h).map(|(x, y)| x * y).sum();
            prop_assert!((div[v] - expected).abs() <= 1e-12 * (1.0 + field.norm1()));
        }
        prop_assert!(div.sum().abs() <= 1e-12 * field.norm1().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn total_variation_ignores_orientation((g, u) in graph_with_vertex_values(-100.0, 100.0), pick in any::<prop::sample::Index>()) {
        let u = VertexField::new(u).unwrap();
        let k = pick.index(g.edge_count());
        let flipped = g.with_edge_flipped(k);
        let j = total_variation(&g, &u).unwrap();
        let oracle: f64 = g.edges().iter().map(|&(t, h)| (u[h] - u[t]).abs()).sum();
        prop_assert!((j - oracle).abs() <= 1e-12 * (1.0 + oracle));
        prop_assert_eq!(j, total_variation(&flipped, &u).unwrap());
    }

    #[test]
    fn pattern_determines_membership((g, u) in graph_with_vertex_values(-5.0, 5.0), scale in 0.25f64..4.0, shift in -3.0f64..3.0, c in prop::collection::vec(-2.0f64..2.0, 12)) {
        let tol = Tolerances::default();
        let u = VertexField::new(u).unwrap();
        // A positive affine image keeps the sign pattern.
        let h = u.map(|x| scale * x + shift);
        prop_assert_eq!(sign_pattern(&g, &u, &tol).unwrap(), sign_pattern(&g, &h, &tol).unwrap());
        let mut candidate = VertexField::new(c[..g.vertex_count()].to_vec()).unwrap();
        let mean = candidate.mean();
        candidate = candidate.map(|x| x - mean);
        let a = subdifferential_membership(&g, &u, &candidate, &tol).unwrap();
        let b = subdifferential_membership(&g, &h, &candidate, &tol).unwrap();
        prop_assert_eq!(a.member, b.member);
        prop_assert!((a.residual - b.residual).abs() <= 1e-7);
    }

    #[test]
    fn convex_combination_keeps_pattern((g, u) in graph_with_vertex_values(-5.0, 5.0), scale in 0.25f64..4.0, shift in -3.0f64..3.0, lambda in 0.01f64..0.99) {
        let tol = Tolerances::default();
        let u = VertexField::new(u).unwrap();
        let h = u.map(|x| scale * x + shift);
        let mix = u.scaled(lambda).add_scaled(1.0 - lambda, &h);
        prop_assert_eq!(sign_pattern(&g, &mix, &tol).unwrap(), sign_pattern(&g, &u, &tol).unwrap());
    }
}

#[test]
fn membership_witness_reproduces_candidate() {
    let g = OrientedGraph::cartesian(3, 3).unwrap();
    let tol = Tolerances::default();
    let u = VertexField::from_f64(&[0.0, 1.0, 1.0, 2.0, 2.0, 5.0, 3.0, 3.0, 3.0]).unwrap();
    let pattern = sign_pattern(&g, &u, &tol).unwrap();
    let h = EdgeField::new(pattern.labels().iter().map(|&l| -f64::from(l) * 1.0).collect()).unwrap();
    let candidate = divergence(&g, &h).unwrap();
    let m = subdifferential_membership(&g, &u, &candidate, &tol).unwrap();
    assert!(m.member);
    let back = divergence(&g, &m.witness).unwrap();
    assert!(back.dist_inf(&candidate) <= 1e-9);
    assert!(m.witness.iter().all(|x| x.abs() <= 1.0 + 1e-12));

    let outside = candidate.scaled(3.0);
    assert!(!subdifferential_membership(&g, &u, &outside, &tol).unwrap().member);
}
