//! Seeded generators for test instances.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{OrientedGraph, VertexField};
use crate::scalar::Scalar;

/// Connected oriented graph on `n` vertices: a random spanning tree plus
/// each remaining vertex pair with probability `extra` (random orientation).
pub fn random_connected_graph<R: Rng + ?Sized>(rng: &mut R, n: usize, extra: f64) -> OrientedGraph {
    assert!(n >= 1, "graph needs a vertex");
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut adjacent = vec![vec![false; n]; n];
    let mut pairs = Vec::new();
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        pairs.push((order[k], parent));
        adjacent[order[k]][parent] = true;
        adjacent[parent][order[k]] = true;
    }
    for a in 0..n {
        for b in a + 1..n {
            if !adjacent[a][b] && rng.gen_bool(extra.clamp(0.0, 1.0)) {
                pairs.push((a, b));
            }
        }
    }
    let mut edges: Vec<(usize, usize)> = pairs
        .into_iter()
        .map(|(a, b)| if rng.gen_bool(0.5) { (a, b) } else { (b, a) })
        .collect();
    edges.shuffle(rng);
    OrientedGraph::new(n, edges).expect("spanning tree keeps the graph connected")
}

/// Independent uniform values in `[lo, hi)`.
pub fn uniform_field<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize, lo: f64, hi: f64) -> VertexField<T> {
    let values: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
    VertexField::from_f64(&values).expect("finite samples")
}

/// Integers in `[lo, hi]`; repeated values create flat edges.
pub fn integer_field<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize, lo: i64, hi: i64) -> VertexField<T> {
    let values: Vec<f64> = (0..n).map(|_| rng.gen_range(lo..=hi) as f64).collect();
    VertexField::from_f64(&values).expect("finite samples")
}
