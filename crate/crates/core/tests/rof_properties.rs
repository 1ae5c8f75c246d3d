use graphtv::random::{integer_field, random_connected_graph, uniform_field};
use graphtv::{divergence, instances, rof_optimality, rof_path, rof_solve, OrientedGraph, Tolerances, VertexField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instances_batch(seed: u64, count: usize) -> Vec<(OrientedGraph, VertexField<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let n = rng.gen_range(2..13);
            let g = random_connected_graph(&mut rng, n, 0.4);
            let f = if k % 2 == 0 {
                uniform_field(&mut rng, n, -10.0, 10.0)
            } else {
                integer_field(&mut rng, n, -5, 5)
            };
            (g, f)
        })
        .collect()
}

#[test]
fn mean_norms_and_optimality_along_a_grid() {
    let tol = Tolerances::default();
    for (g, f) in instances_batch(21, 20) {
        let mean_norm = f.mean_field().norm2();
        let mut previous = f.norm2();
        for k in 0..=15 {
            let alpha = 0.25 * k as f64;
            let sol = rof_solve(&g, &f, alpha, &tol).unwrap();
            assert!((sol.u.sum() - f.sum()).abs() <= 1e-8 * f.norm1().max(1.0));
            let norm = sol.u.norm2();
            assert!(norm <= previous + 1e-8, "norm increased at {alpha}");
            assert!(mean_norm <= norm + 1e-8 && norm <= f.norm2() + 1e-8);
            previous = norm;
            let rebuilt = f.add(&divergence(&g, &sol.dual_flow).unwrap());
            assert!(rebuilt.dist_inf(&sol.u) <= 10.0 * tol.solve_tol * f.norm_inf().max(1.0));
            assert!(sol.dual_flow.norm_inf() <= alpha * (1.0 + 1e-12));
            if alpha > 0.0 {
                assert!(rof_optimality(&g, &f, &sol, &tol).unwrap().member, "optimality at {alpha}");
            }
        }
    }
}

#[test]
fn path_segments_are_affine_and_continuous() {
    let tol = Tolerances::default();
    for (g, f) in instances_batch(22, 8) {
        let path = rof_path(&g, &f, &tol).unwrap();
        assert!(path.terminal_value().dist_inf(&f.mean_field()) <= 1e-9 * f.norm_inf().max(1.0));
        assert!(path.max_discontinuity() <= tol.event_tol.max(1e-6));
        let knots = path.knots().to_vec();
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (first, last) = (path.evaluate(a), path.evaluate(b));
            for s in [0.2, 0.5, 0.8] {
                let alpha = a + s * (b - a);
                let solved = rof_solve(&g, &f, alpha, &tol).unwrap().u;
                let interpolant = first.scaled(1.0 - s).add_scaled(s, &last);
                let limit = 10.0 * tol.solve_tol * f.norm_inf().max(1.0);
                assert!(solved.dist_inf(&interpolant) <= limit, "segment [{a}, {b}] at {alpha}");
                assert!(solved.dist_inf(&path.evaluate(alpha)) <= limit);
            }
        }
        let beyond = path.stationary_from() * 1.5 + 1.0;
        assert!(rof_solve(&g, &f, beyond, &tol).unwrap().u.dist_inf(&f.mean_field()) <= 1e-8 * f.norm_inf().max(1.0));
    }
}

#[test]
fn zero_alpha_and_constant_data() {
    let tol = Tolerances::default();
    let (g, f) = instances::counterexample::<f64>();
    assert_eq!(rof_solve(&g, &f, 0.0, &tol).unwrap().u, f);
    let square = OrientedGraph::cartesian(2, 2).unwrap();
    let zero = VertexField::zeros(4);
    for alpha in [0.0, 0.5, 10.0] {
        assert_eq!(rof_solve(&square, &zero, alpha, &tol).unwrap().u, zero);
    }
    let path = rof_path(&square, &zero, &tol).unwrap();
    assert!(path.breakpoints().is_empty());
}

#[test]
fn scalar_precision_f32() {
    let (g, f) = instances::counterexample::<f32>();
    let sol = rof_solve(&g, &f, 1.0f32, &Tolerances::default()).unwrap();
    let exact = instances::counterexample_rof(1.0).unwrap();
    for v in 0..9 {
        assert!((f64::from(sol.u[v]) - exact[v]).abs() <= 1e-3);
    }
}
