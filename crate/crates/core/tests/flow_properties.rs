use graphtv::random::{random_connected_graph, uniform_field};
use graphtv::{divergence, flow_backward_euler, flow_solve, instances, rof_solve, OrientedGraph, Tolerances, VertexField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_instance(rng: &mut ChaCha8Rng) -> (OrientedGraph, VertexField<f64>) {
    let n = rng.gen_range(2..13);
    let g = random_connected_graph(rng, n, 0.4);
    let f = uniform_field(rng, n, -10.0, 10.0);
    (g, f)
}

#[test]
fn trajectory_invariants() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..20 {
        let (g, f) = random_instance(&mut rng);
        let traj = flow_solve(&g, &f, &tol).unwrap();
        let mut times = vec![0.0];
        times.extend_from_slice(traj.breakpoints());
        let mut previous_norm = f.norm2();
        for &t in &times {
            let u = traj.value_at(t);
            assert!((u.sum() - f.sum()).abs() <= 1e-8 * f.norm1());
            assert!(u.norm2() <= previous_norm + 1e-12);
            previous_norm = u.norm2();
            let rebuilt = f.add(&divergence(&g, &traj.antiderivative_at(t)).unwrap());
            assert!(rebuilt.dist_inf(&u) <= 10.0 * tol.solve_tol * f.norm_inf().max(1.0));
        }
        for h in traj.flows() {
            assert!(h.norm_inf() <= 1.0 + 1e-12);
        }
        let norms: Vec<f64> = traj.directions().map(|d| d.norm2()).collect();
        for w in norms.windows(2) {
            assert!(w[1] < w[0], "direction norms {norms:?}");
        }
        let end = traj.stationary_time();
        assert!(traj.value_at(end + 1.0).dist_inf(&f.mean_field()) <= 1e-9 * f.norm_inf());
    }
}

#[test]
fn contraction_and_semigroup() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..20 {
        let (g, f1) = random_instance(&mut rng);
        let f2 = uniform_field(&mut rng, g.vertex_count(), -10.0, 10.0);
        let a = flow_solve(&g, &f1, &tol).unwrap();
        let b = flow_solve(&g, &f2, &tol).unwrap();
        let horizon = a.stationary_time().max(b.stationary_time()) * 1.1;
        let grid: Vec<f64> = (0..=12).map(|k| horizon * k as f64 / 12.0).collect();
        for (i, &s) in grid.iter().enumerate() {
            let gap_s = a.value_at(s).dist2(&b.value_at(s));
            for &t in &grid[i..] {
                assert!(a.value_at(t).dist2(&b.value_at(t)) <= gap_s + 1e-7);
            }
            let restarted = flow_solve(&g, &a.value_at(s), &tol).unwrap();
            for &t in &grid {
                assert!(restarted.value_at(t).dist_inf(&a.value_at(s + t)) <= 1e-7, "semigroup s={s} t={t}");
            }
        }
    }
}

#[test]
fn first_segment_agrees_with_rof() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..20 {
        let (g, f) = random_instance(&mut rng);
        let traj = flow_solve(&g, &f, &tol).unwrap();
        let t1 = traj.breakpoints().first().copied().unwrap_or(0.0);
        for s in [0.1, 0.5, 1.0] {
            let alpha = s * t1;
            let rof = rof_solve(&g, &f, alpha, &tol).unwrap().u;
            assert!(rof.dist_inf(&traj.value_at(alpha)) <= 1e-6);
        }
    }
}

#[test]
fn backward_euler_converges_on_counterexample() {
    let tol = Tolerances::default();
    let (g, f) = instances::counterexample::<f64>();
    let exact = flow_solve(&g, &f, &tol).unwrap().value_at(1.0);
    let errors: Vec<f64> = [0.02, 0.01, 0.005]
        .iter()
        .map(|&h| flow_backward_euler(&g, &f, 1.0, h, &tol).unwrap().dist_inf(&exact))
        .collect();
    assert!(errors.iter().all(|&e| e <= 1e-9), "{errors:?}");
}

#[test]
fn backward_euler_converges_across_the_breakpoint() {
    let tol = Tolerances::default();
    let (g, f) = instances::counterexample::<f64>();
    let exact = flow_solve(&g, &f, &tol).unwrap().value_at(1.0);
    let errors: Vec<f64> = [0.3, 0.07, 0.015]
        .iter()
        .map(|&h| flow_backward_euler(&g, &f, 1.0, h, &tol).unwrap().dist_inf(&exact))
        .collect();
    assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
    assert!(errors[0] > 0.05 && errors[2] < 0.005);
}

#[test]
fn zero_time_and_constant_datum() {
    let tol = Tolerances::default();
    let (g, f) = instances::counterexample::<f64>();
    let traj = flow_solve(&g, &f, &tol).unwrap();
    assert_eq!(traj.value_at(0.0), f);
    let constant = VertexField::constant(9, 4.5);
    let traj = flow_solve(&g, &constant, &tol).unwrap();
    assert!(traj.breakpoints().is_empty());
    assert_eq!(traj.value_at(7.0), constant);
}
