//! Oriented graphs, vertex/edge fields, the divergence operator, total
//! variation, sign patterns and subdifferential membership.

mod field;
pub(crate) mod pattern;
mod subdiff;

use std::collections::HashSet;

pub use field::{EdgeField, VertexField};
pub use pattern::{sign_pattern, SignPattern, Tolerances};
pub use subdiff::{subdifferential_membership, Membership};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Grid placement of a Cartesian graph: `grid[i * cols + j]` is the vertex
/// index of the grid node in row `i`, column `j` (zero-based).
///
/// Edge lookups are stored so the isotropic constraint groups can be built
/// without searching the edge list again.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CartesianLayout {
    rows: usize,
    cols: usize,
    grid: Vec<usize>,
    /// Edge between `(i + 1, j)` and `(i, j)`, indexed `i * cols + j`.
    vertical: Vec<usize>,
    /// Edge between `(i, j + 1)` and `(i, j)`, indexed `i * (cols - 1) + j`.
    horizontal: Vec<usize>,
}

impl CartesianLayout {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn grid(&self) -> &[usize] {
        &self.grid
    }

    pub fn vertex(&self, i: usize, j: usize) -> usize {
        self.grid[i * self.cols + j]
    }

    /// Edge index joining `(i + 1, j)` and `(i, j)`; requires `i + 1 < rows`.
    pub fn vertical_edge(&self, i: usize, j: usize) -> usize {
        self.vertical[i * self.cols + j]
    }

    /// Edge index joining `(i, j + 1)` and `(i, j)`; requires `j + 1 < cols`.
    pub fn horizontal_edge(&self, i: usize, j: usize) -> usize {
        self.horizontal[i * (self.cols - 1) + j]
    }
}

/// A connected oriented graph without self-loops, duplicates or
/// antiparallel pairs. Edge order is the construction order and is
/// preserved everywhere; edge fields are indexed positionally.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    degree: Vec<usize>,
    names: Option<Vec<String>>,
    cartesian: Option<CartesianLayout>,
}

impl OrientedGraph {
    /// Builds and validates a graph from `(tail, head)` pairs.
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut degree = vec![0; vertex_count];
        for (k, &(tail, head)) in edges.iter().enumerate() {
            for vertex in [tail, head] {
                if vertex >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        edge: k,
                        vertex,
                        vertex_count,
                    });
                }
            }
            if tail == head {
                return Err(Error::SelfLoop {
                    edge: k,
                    vertex: tail,
                });
            }
            if seen.contains(&(tail, head)) {
                return Err(Error::DuplicateEdge { edge: k, tail, head });
            }
            if seen.contains(&(head, tail)) {
                return Err(Error::AntiparallelEdge { edge: k, tail, head });
            }
            seen.insert((tail, head));
            degree[tail] += 1;
            degree[head] += 1;
        }
        let graph = Self {
            vertex_count,
            edges,
            degree,
            names: None,
            cartesian: None,
        };
        if let Some(vertex) = graph.first_unreachable_vertex() {
            return Err(Error::Disconnected { vertex });
        }
        Ok(graph)
    }

    /// Path `v1 ← v2 ← … ← vn`: edge `k` points from vertex `k + 1` to `k`.
    pub fn path(n: usize) -> Result<Self> {
        let edges = (0..n.saturating_sub(1)).map(|k| (k + 1, k)).collect();
        let names = (1..=n).map(|k| format!("v{k}")).collect();
        Self::new(n, edges)?.with_names(names)
    }

    /// `rows × cols` Cartesian graph in row-major vertex order with every
    /// edge pointing from the larger grid index to the smaller one:
    /// `(v_{i+1,j}, v_{i,j})` and `(v_{i,j+1}, v_{i,j})`.
    pub fn cartesian(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyGraph);
        }
        let at = |i: usize, j: usize| i * cols + j;
        let mut edges = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                if i + 1 < rows {
                    edges.push((at(i + 1, j), at(i, j)));
                }
                if j + 1 < cols {
                    edges.push((at(i, j + 1), at(i, j)));
                }
            }
        }
        let compact = rows < 10 && cols < 10;
        let names = (0..rows)
            .flat_map(|i| {
                (0..cols).map(move |j| {
                    if compact {
                        format!("v{}{}", i + 1, j + 1)
                    } else {
                        format!("v{}_{}", i + 1, j + 1)
                    }
                })
            })
            .collect();
        Self::new(rows * cols, edges)?
            .with_names(names)?
            .with_cartesian(rows, cols, None)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.vertex_count {
            return Err(Error::LengthMismatch {
                what: "vertex names",
                expected: self.vertex_count,
                found: names.len(),
            });
        }
        self.names = Some(names);
        Ok(self)
    }

    /// Tags the graph as Cartesian. `grid` defaults to row-major order. The
    /// edge set must be exactly the grid adjacency; each edge may have either
    /// orientation.
    pub fn with_cartesian(mut self, rows: usize, cols: usize, grid: Option<Vec<usize>>) -> Result<Self> {
        if rows * cols != self.vertex_count {
            return Err(Error::InvalidLayout(format!(
                "{rows} x {cols} grid does not match {} vertices",
                self.vertex_count
            )));
        }
        let grid = grid.unwrap_or_else(|| (0..rows * cols).collect());
        if grid.len() != rows * cols {
            return Err(Error::InvalidLayout(format!(
                "grid lists {} cells, expected {}",
                grid.len(),
                rows * cols
            )));
        }
        let mut used = vec![false; self.vertex_count];
        for &v in &grid {
            if v >= self.vertex_count || used[v] {
                return Err(Error::InvalidLayout(format!(
                    "grid is not a permutation of the vertices (entry {v})"
                )));
            }
            used[v] = true;
        }
        let expected_edges = rows * (cols - 1) + (rows - 1) * cols;
        if self.edges.len() != expected_edges {
            return Err(Error::InvalidLayout(format!(
                "graph has {} edges, a {rows} x {cols} grid has {expected_edges}",
                self.edges.len()
            )));
        }
        let lookup = |a: usize, b: usize| -> Result<usize> {
            self.edges
                .iter()
                .position(|&(t, h)| (t == a && h == b) || (t == b && h == a))
                .ok_or_else(|| Error::InvalidLayout(format!("missing grid edge between vertices {a} and {b}")))
        };
        let at = |i: usize, j: usize| grid[i * cols + j];
        let mut vertical = Vec::with_capacity((rows.saturating_sub(1)) * cols);
        for i in 0..rows.saturating_sub(1) {
            for j in 0..cols {
                vertical.push(lookup(at(i + 1, j), at(i, j))?);
            }
        }
        let mut horizontal = Vec::with_capacity(rows * cols.saturating_sub(1));
        for i in 0..rows {
            for j in 0..cols.saturating_sub(1) {
                horizontal.push(lookup(at(i, j + 1), at(i, j))?);
            }
        }
        self.cartesian = Some(CartesianLayout {
            rows,
            cols,
            grid,
            vertical,
            horizontal,
        });
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degree[v]
    }

    pub fn max_degree(&self) -> usize {
        self.degree.iter().copied().max().unwrap_or(0)
    }

    /// Upper bound `2 · max degree` on the squared operator norm of the
    /// divergence (the largest Laplacian eigenvalue).
    pub fn divergence_norm_sq_bound(&self) -> usize {
        (2 * self.max_degree()).max(1)
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Name of vertex `v`, falling back to its index.
    pub fn vertex_name(&self, v: usize) -> String {
        match &self.names {
            Some(names) => names[v].clone(),
            None => v.to_string(),
        }
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.names.as_ref()?.iter().position(|n| n == name)
    }

    /// Index of the edge joining `a` and `b` in either orientation.
    pub fn find_edge(&self, a: usize, b: usize) -> Option<usize> {
        self.edges
            .iter()
            .position(|&(t, h)| (t == a && h == b) || (t == b && h == a))
    }

    pub fn cartesian_layout(&self) -> Option<&CartesianLayout> {
        self.cartesian.as_ref()
    }

    /// Same graph with edge `k` reversed. Validation is unaffected.
    pub fn with_edge_flipped(&self, k: usize) -> Self {
        let mut g = self.clone();
        let (t, h) = g.edges[k];
        g.edges[k] = (h, t);
        g.cartesian = None;
        g
    }

    fn first_unreachable_vertex(&self) -> Option<usize> {
        let mut adjacency = vec![Vec::new(); self.vertex_count];
        for &(t, h) in &self.edges {
            adjacency[t].push(h);
            adjacency[h].push(t);
        }
        let mut visited = vec![false; self.vertex_count];
        let mut stack = vec![0];
        visited[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if !visited[w] {
                    visited[w] = true;
                    stack.push(w);
                }
            }
        }
        visited.iter().position(|&seen| !seen)
    }

    pub(crate) fn check_vertex_field<T>(&self, what: &'static str, u: &VertexField<T>) -> Result<()> {
        if u.as_ref().len() != self.vertex_count {
            return Err(Error::LengthMismatch {
                what,
                expected: self.vertex_count,
                found: u.as_ref().len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_edge_field<T>(&self, what: &'static str, h: &EdgeField<T>) -> Result<()> {
        if h.as_ref().len() != self.edges.len() {
            return Err(Error::LengthMismatch {
                what,
                expected: self.edges.len(),
                found: h.as_ref().len(),
            });
        }
        Ok(())
    }

    /// `out = div h` without length checks.
    pub(crate) fn divergence_into<T: Scalar>(&self, h: &[T], out: &mut [T]) {
        out.iter_mut().for_each(|v| *v = T::zero());
        for (&(tail, head), &flow) in self.edges.iter().zip(h) {
            out[head] = out[head] + flow;
            out[tail] = out[tail] - flow;
        }
    }

    /// Adjoint of the divergence: `out[(i, j)] = w[j] − w[i]`.
    pub(crate) fn divergence_adjoint_into<T: Scalar>(&self, w: &[T], out: &mut [T]) {
        for (o, &(tail, head)) in out.iter_mut().zip(&self.edges) {
            *o = w[head] - w[tail];
        }
    }
}

/// `(div H)(v) = Σ_{(w,v)} H − Σ_{(v,w)} H`: inflow minus outflow.
pub fn divergence<T: Scalar>(g: &OrientedGraph, h: &EdgeField<T>) -> Result<VertexField<T>> {
    g.check_edge_field("edge flow", h)?;
    let mut out = VertexField::zeros(g.vertex_count());
    g.divergence_into(h.as_slice(), out.as_mut_slice());
    Ok(out)
}

/// Anisotropic total variation `Σ_{(i,j) ∈ E} |u(j) − u(i)|`.
pub fn total_variation<T: Scalar>(g: &OrientedGraph, u: &VertexField<T>) -> Result<T> {
    g.check_vertex_field("vertex field", u)?;
    Ok(g.edges()
        .iter()
        .map(|&(t, h)| (u[h] - u[t]).abs())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    #[test]
    fn rejects_invalid_graphs() {
        assert_eq!(OrientedGraph::new(0, vec![]), Err(Error::EmptyGraph));
        assert!(matches!(
            OrientedGraph::new(2, vec![(0, 0)]),
            Err(Error::SelfLoop { .. })
        ));
        assert!(matches!(
            OrientedGraph::new(2, vec![(0, 1), (1, 0)]),
            Err(Error::AntiparallelEdge { .. })
        ));
        assert!(matches!(
            OrientedGraph::new(2, vec![(0, 1), (0, 1)]),
            Err(Error::DuplicateEdge { .. })
        ));
        assert!(matches!(
            OrientedGraph::new(3, vec![(0, 1)]),
            Err(Error::Disconnected { vertex: 2 })
        ));
        assert!(matches!(
            OrientedGraph::new(2, vec![(0, 5)]),
            Err(Error::VertexOutOfRange { .. })
        ));
        assert!(OrientedGraph::new(1, vec![]).is_ok());
    }

    #[test]
    fn divergence_of_zero_flow_is_zero() {
        let (g, _) = instances::counterexample::<f64>();
        let d = divergence(&g, &EdgeField::<f64>::zeros(g.edge_count())).unwrap();
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn divergence_of_single_edge_flow() {
        let (g, _) = instances::counterexample::<f64>();
        let v22 = g.vertex_index("v22").unwrap();
        let v32 = g.vertex_index("v32").unwrap();
        let e = g.edges().iter().position(|&e| e == (v32, v22)).unwrap();
        let mut h = EdgeField::zeros(g.edge_count());
        h[e] = 1.0;
        let d = divergence(&g, &h).unwrap();
        for v in 0..g.vertex_count() {
            let expected = if v == v22 {
                1.0
            } else if v == v32 {
                -1.0
            } else {
                0.0
            };
            assert_eq!(d[v], expected);
        }
    }

    #[test]
    fn divergence_rejects_wrong_length() {
        let g = OrientedGraph::path(3).unwrap();
        assert!(matches!(
            divergence(&g, &EdgeField::<f64>::zeros(5)),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn total_variation_of_counterexample_datum() {
        let (g, f) = instances::counterexample::<f64>();
        assert_eq!(total_variation(&g, &f).unwrap(), 1048.0);
        assert_eq!(total_variation(&g, &f.scaled(-1.0)).unwrap(), 1048.0);
        let c = VertexField::constant(g.vertex_count(), 3.5);
        assert_eq!(total_variation(&g, &c).unwrap(), 0.0);
    }

    #[test]
    fn cartesian_layout_matches_counterexample_orientation() {
        let (g, _) = instances::counterexample::<f64>();
        let layout = g.cartesian_layout().unwrap();
        for i in 0..2 {
            for j in 0..3 {
                let (t, h) = g.edges()[layout.vertical_edge(i, j)];
                assert_eq!((t, h), (layout.vertex(i + 1, j), layout.vertex(i, j)));
            }
        }
        let plain = OrientedGraph::cartesian(3, 3).unwrap();
        assert_eq!(plain.edge_count(), 12);
        assert_eq!(plain.vertex_name(5), "v23");
    }

    #[test]
    fn cartesian_tag_rejects_wrong_edge_set() {
        let g = OrientedGraph::path(4).unwrap();
        assert!(matches!(
            g.with_cartesian(2, 2, None),
            Err(Error::InvalidLayout(_))
        ));
    }
}
