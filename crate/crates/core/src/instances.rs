//! Built-in instances: the 3×3 nonequivalence counterexample with its closed
//! form solutions, and a few eigenfunctions of `J`.

use crate::graph::{OrientedGraph, VertexField};
use crate::scalar::Scalar;

/// Vertex names of the counterexample, in vertex index order.
pub const COUNTEREXAMPLE_NAMES: [&str; 9] = ["v12", "v22", "v32", "v23", "v21", "v13", "v11", "v31", "v33"];

/// Datum of the counterexample, in vertex index order.
pub const COUNTEREXAMPLE_DATUM: [f64; 9] = [100.0, 18.0, 20.0, 100.0, 100.0, 200.0, 200.0, 200.0, 0.0];

const COUNTEREXAMPLE_EDGES: [(&str, &str); 12] = [
    ("v22", "v12"),
    ("v32", "v22"),
    ("v23", "v22"),
    ("v22", "v21"),
    ("v13", "v12"),
    ("v12", "v11"),
    ("v23", "v13"),
    ("v21", "v11"),
    ("v33", "v23"),
    ("v33", "v32"),
    ("v32", "v31"),
    ("v31", "v21"),
];

/// Index into [`COUNTEREXAMPLE_NAMES`].
fn ix(name: &str) -> usize {
    COUNTEREXAMPLE_NAMES
        .iter()
        .position(|&n| n == name)
        .expect("known counterexample vertex")
}

fn counterexample_graph() -> OrientedGraph {
    let edges = COUNTEREXAMPLE_EDGES.iter().map(|&(t, h)| (ix(t), ix(h))).collect();
    let names = COUNTEREXAMPLE_NAMES.iter().map(|s| s.to_string()).collect();
    let grid = (1..=3)
        .flat_map(|i| (1..=3).map(move |j| ix(&format!("v{i}{j}"))))
        .collect();
    OrientedGraph::new(9, edges)
        .and_then(|g| g.with_names(names))
        .and_then(|g| g.with_cartesian(3, 3, Some(grid)))
        .expect("counterexample graph is valid")
}

/// The 3×3 grid graph and datum on which ROF and the TV flow first differ.
pub fn counterexample<T: Scalar>() -> (OrientedGraph, VertexField<T>) {
    let f = VertexField::from_f64(&COUNTEREXAMPLE_DATUM).expect("finite datum");
    (counterexample_graph(), f)
}

/// The counterexample datum with `f(v22) = 20`; ROF and flow agree on it and
/// both create a jump on `(v32, v22)`.
pub fn counterexample_variant<T: Scalar>() -> (OrientedGraph, VertexField<T>) {
    let mut datum = COUNTEREXAMPLE_DATUM;
    datum[ix("v22")] = 20.0;
    let f = VertexField::from_f64(&datum).expect("finite datum");
    (counterexample_graph(), f)
}

/// Index of the edge `(v32, v22)`, the only edge whose sign changes.
pub fn counterexample_special_edge(g: &OrientedGraph) -> Option<usize> {
    let (a, b) = (g.vertex_index("v32")?, g.vertex_index("v22")?);
    g.edges().iter().position(|&e| e == (a, b))
}

/// Shared part of every closed form on `[0, 4]`: `(v12, v23, v21, corners, v33)`.
fn outer_ring(s: f64) -> [f64; 9] {
    let mut u = [0.0; 9];
    u[ix("v12")] = 100.0 + s;
    u[ix("v21")] = 100.0 + s;
    u[ix("v23")] = 100.0 - s;
    for c in ["v13", "v11", "v31"] {
        u[ix(c)] = 200.0 - 2.0 * s;
    }
    u[ix("v33")] = 2.0 * s;
    u
}

fn field(values: [f64; 9]) -> VertexField<f64> {
    VertexField::from_f64(&values).expect("finite closed form")
}

/// Closed-form ROF minimizer of the counterexample for `0 ≤ alpha ≤ 4`.
pub fn counterexample_rof(alpha: f64) -> Option<VertexField<f64>> {
    if !(0.0..=4.0).contains(&alpha) {
        return None;
    }
    let mut u = outer_ring(alpha);
    let (v22, v32) = if alpha <= 0.4 {
        (18.0 + 4.0 * alpha, 20.0 - alpha)
    } else if alpha <= 2.0 {
        let m = 19.0 + 1.5 * alpha;
        (m, m)
    } else {
        (18.0 + 2.0 * alpha, 20.0 + alpha)
    };
    u[ix("v22")] = v22;
    u[ix("v32")] = v32;
    Some(field(u))
}

/// Closed-form dual flow `F_α((v32, v22))` of the counterexample, `0 ≤ alpha ≤ 4`.
pub fn counterexample_rof_special_flow(alpha: f64) -> Option<f64> {
    if !(0.0..=4.0).contains(&alpha) {
        None
    } else if alpha <= 0.4 {
        Some(alpha)
    } else if alpha <= 2.0 {
        Some((2.0 - 3.0 * alpha) / 2.0)
    } else {
        Some(-alpha)
    }
}

/// Closed-form TV flow of the counterexample for `0 ≤ t ≤ 4`.
pub fn counterexample_flow(t: f64) -> Option<VertexField<f64>> {
    if !(0.0..=4.0).contains(&t) {
        return None;
    }
    let mut u = outer_ring(t);
    let (v22, v32) = if t <= 0.4 {
        (18.0 + 4.0 * t, 20.0 - t)
    } else {
        (94.0 / 5.0 + 2.0 * t, 96.0 / 5.0 + t)
    };
    u[ix("v22")] = v22;
    u[ix("v32")] = v32;
    Some(field(u))
}

/// Closed-form `F(t)((v32, v22))` of the counterexample flow, `0 ≤ t ≤ 4`.
pub fn counterexample_flow_special_flow(t: f64) -> Option<f64> {
    if !(0.0..=4.0).contains(&t) {
        None
    } else if t <= 0.4 {
        Some(t)
    } else {
        Some(0.8 - t)
    }
}

/// Common ROF and flow solution for the variant datum, `0 ≤ s ≤ 4`.
pub fn counterexample_variant_solution(s: f64) -> Option<VertexField<f64>> {
    if !(0.0..=4.0).contains(&s) {
        return None;
    }
    let mut u = outer_ring(s);
    u[ix("v22")] = 20.0 + 2.0 * s;
    u[ix("v32")] = 20.0 + s;
    Some(field(u))
}

/// A constructed eigenfunction: `λ f ∈ ∂J(f)`.
#[derive(Debug, Clone)]
pub struct Eigenfunction<T> {
    pub graph: OrientedGraph,
    pub datum: VertexField<T>,
    pub lambda: T,
}

/// `f = (1, −1)` on a single edge, `λ = 1`.
pub fn two_vertex_eigenfunction<T: Scalar>() -> Eigenfunction<T> {
    Eigenfunction {
        graph: OrientedGraph::new(2, vec![(0, 1)]).expect("valid edge"),
        datum: VertexField::from_f64(&[1.0, -1.0]).expect("finite"),
        lambda: T::one(),
    }
}

/// `f = (1, 0, …, 0, −1)` on the path with `n ≥ 2` vertices, `λ = 1`.
pub fn path_eigenfunction<T: Scalar>(n: usize) -> Option<Eigenfunction<T>> {
    if n < 2 {
        return None;
    }
    let mut values = vec![0.0; n];
    values[0] = 1.0;
    values[n - 1] = -1.0;
    Some(Eigenfunction {
        graph: OrientedGraph::path(n).ok()?,
        datum: VertexField::from_f64(&values).ok()?,
        lambda: T::one(),
    })
}

/// Two-row grid with `+1` on the top row and `−1` on the bottom row, `λ = 1`.
pub fn two_row_grid_eigenfunction<T: Scalar>(cols: usize) -> Option<Eigenfunction<T>> {
    if cols == 0 {
        return None;
    }
    let values: Vec<f64> = (0..2 * cols).map(|k| if k < cols { 1.0 } else { -1.0 }).collect();
    Some(Eigenfunction {
        graph: OrientedGraph::cartesian(2, cols).ok()?,
        datum: VertexField::from_f64(&values).ok()?,
        lambda: T::one(),
    })
}
