//! Euclidean projection of a vertex field onto `div S` for a flow set `S`.

use crate::error::Result;
use crate::graph::{EdgeField, OrientedGraph, Tolerances, VertexField};
use crate::scalar::Scalar;

use super::accelerated::{accelerated_descent, vertex_values, AcceleratedConfig, HalfSquaredNorm};
use super::{BoxSpec, FlowSet, SolveReport};

/// Result of projecting `target` onto `div S`.
#[derive(Debug, Clone, PartialEq)]
pub struct DivProjection<T> {
    /// A flow `H ∈ S` attaining the projection (not unique in general).
    pub flow: EdgeField<T>,
    /// The projection point `div H`.
    pub divergence: VertexField<T>,
    /// `target − div H`.
    pub remainder: VertexField<T>,
    pub report: SolveReport<T>,
}

/// Magnitude used to turn `solve_tol` into absolute thresholds.
fn problem_scale<T: Scalar, S: FlowSet<T> + ?Sized>(target: &VertexField<T>, set: &S) -> T {
    let bound = (0..set.len()).fold(T::zero(), |m, e| m.max(set.edge_bound(e)));
    T::one().max(target.norm_inf()).max(bound)
}

/// Projects `target` onto `{div H : H ∈ box}` by accelerated projected
/// gradient, then snaps the result onto its active face when the face can
/// be certified.
pub fn project_onto_div_box<T: Scalar>(
    g: &OrientedGraph,
    target: &VertexField<T>,
    bounds: &BoxSpec<T>,
    tol: &Tolerances<T>,
) -> Result<DivProjection<T>> {
    project_onto_div_set(g, target, bounds, tol, None)
}

/// Minimal-norm element of `{div H : H ∈ box}`, i.e. the projection of 0.
pub fn min_norm_divergence<T: Scalar>(
    g: &OrientedGraph,
    bounds: &BoxSpec<T>,
    tol: &Tolerances<T>,
) -> Result<DivProjection<T>> {
    let zero = VertexField::zeros(g.vertex_count());
    project_onto_div_set(g, &zero, bounds, tol, None)
}

/// Projection onto `div S` for any flow set, optionally warm-started.
pub fn project_onto_div_set<T: Scalar, S: FlowSet<T> + ?Sized>(
    g: &OrientedGraph,
    target: &VertexField<T>,
    set: &S,
    tol: &Tolerances<T>,
    warm_start: Option<&EdgeField<T>>,
) -> Result<DivProjection<T>> {
    tol.validate()?;
    g.check_vertex_field("projection target", target)?;
    if set.len() != g.edge_count() {
        return Err(crate::Error::LengthMismatch {
            what: "flow set",
            expected: g.edge_count(),
            found: set.len(),
        });
    }
    if let Some(h) = warm_start {
        g.check_edge_field("warm start", h)?;
    }
    let scale = problem_scale(target, set);
    let start = match warm_start {
        Some(h) => h.as_slice().to_vec(),
        None => vec![T::zero(); g.edge_count()],
    };
    let config = AcceleratedConfig {
        lipschitz: T::of_usize(g.divergence_norm_sq_bound()),
        tol: tol.solve_tol * scale,
        max_iterations: tol.max_iterations,
        stall: None,
    };
    let outcome = accelerated_descent(
        g,
        target.as_slice(),
        set,
        &HalfSquaredNorm,
        start,
        &config,
        |_, _| {},
    );

    let mut report = SolveReport {
        iterations: outcome.iterations,
        objective: outcome.objective,
        optimality: outcome.optimality / scale,
        converged: outcome.converged,
        polished: false,
    };
    let mut flow = outcome.flow;
    let mut remainder = outcome.vertex;

    if let Some(bounds) = set.as_box() {
        let base_threshold = tol.flat_tol * scale;
        for threshold in [base_threshold, base_threshold * T::of(100.0)] {
            if let Some(polished) = polish(g, target, bounds, &flow, &remainder, threshold, scale, tol) {
                report.iterations += polished.iterations;
                report.optimality = polished.residual / scale;
                report.objective = polished.remainder.iter().map(|&x| x * x).sum::<T>() * T::of(0.5);
                report.converged = true;
                report.polished = true;
                flow = polished.flow;
                remainder = polished.remainder;
                break;
            }
        }
    }

    let remainder = VertexField::new(remainder)?;
    let divergence = target.sub(&remainder);
    Ok(DivProjection {
        flow: EdgeField::new(flow)?,
        divergence,
        remainder,
        report,
    })
}

struct Polished<T> {
    flow: Vec<T>,
    remainder: Vec<T>,
    residual: T,
    iterations: usize,
}

struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }

    fn find(&mut self, v: usize) -> usize {
        let mut root = v;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut v = v;
        while self.0[v] != root {
            let next = self.0[v];
            self.0[v] = root;
            v = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Active-face polishing for box sets.
///
/// Free edges whose endpoint remainders differ by more than `threshold`
/// are moved to the bound selected by the sign of the gradient; the
/// remaining free edges join their endpoints into clusters, on which the
/// exact remainder is the cluster mean of `target − div(known flows)`.
/// The guess is accepted only if a flow within the box reproduces it to
/// `solve_tol` and every bound choice stays consistent with the new signs.
#[allow(clippy::too_many_arguments)]
fn polish<T: Scalar>(
    g: &OrientedGraph,
    target: &VertexField<T>,
    bounds: &BoxSpec<T>,
    flow: &[T],
    remainder: &[T],
    threshold: T,
    scale: T,
    tol: &Tolerances<T>,
) -> Option<Polished<T>> {
    #[derive(Clone, Copy, PartialEq)]
    enum EdgeState {
        Fixed,
        AtLower,
        AtUpper,
        Cluster,
    }

    let n = g.vertex_count();
    let mut sets = DisjointSets::new(n);
    let mut states = Vec::with_capacity(g.edge_count());
    let mut known = vec![T::zero(); g.edge_count()];
    for (e, &(t, h)) in g.edges().iter().enumerate() {
        let state = if bounds.is_fixed(e) {
            EdgeState::Fixed
        } else if (remainder[t] - remainder[h]).abs() <= threshold {
            sets.union(t, h);
            EdgeState::Cluster
        } else if remainder[t] > remainder[h] {
            EdgeState::AtLower
        } else {
            EdgeState::AtUpper
        };
        known[e] = match state {
            EdgeState::Fixed | EdgeState::AtLower => bounds.lower()[e],
            EdgeState::AtUpper => bounds.upper()[e],
            EdgeState::Cluster => T::zero(),
        };
        states.push(state);
    }

    let mut base = vec![T::zero(); n];
    vertex_values(g, target.as_slice(), &known, &mut base);
    let mut sums = vec![T::zero(); n];
    let mut counts = vec![0usize; n];
    for v in 0..n {
        let r = sets.find(v);
        sums[r] = sums[r] + base[v];
        counts[r] += 1;
    }
    let candidate: Vec<T> = (0..n)
        .map(|v| {
            let r = sets.find(v);
            sums[r] / T::of_usize(counts[r])
        })
        .collect();

    let slack = tol.solve_tol * scale;
    for (e, &(t, h)) in g.edges().iter().enumerate() {
        let consistent = match states[e] {
            EdgeState::AtLower => candidate[t] - candidate[h] >= -slack,
            EdgeState::AtUpper => candidate[t] - candidate[h] <= slack,
            _ => true,
        };
        if !consistent {
            return None;
        }
    }

    // Feasibility of the clustered remainder: find cluster flows within the
    // box whose divergence closes the gap `target − candidate − div known`.
    let (lower, upper): (Vec<T>, Vec<T>) = states
        .iter()
        .enumerate()
        .map(|(e, s)| match s {
            EdgeState::Cluster => (bounds.lower()[e], bounds.upper()[e]),
            _ => (known[e], known[e]),
        })
        .unzip();
    let face = BoxSpec::new_unchecked(lower, upper);
    let gap: Vec<T> = target
        .iter()
        .zip(&candidate)
        .map(|(&f, &c)| f - c)
        .collect();
    let start: Vec<T> = states
        .iter()
        .enumerate()
        .map(|(e, s)| match s {
            EdgeState::Cluster => flow[e],
            _ => known[e],
        })
        .collect();
    let config = AcceleratedConfig {
        lipschitz: T::of_usize(g.divergence_norm_sq_bound()),
        tol: T::of(0.01) * tol.solve_tol * scale,
        max_iterations: tol.max_iterations,
        stall: None,
    };
    let outcome = accelerated_descent(g, &gap, &face, &HalfSquaredNorm, start, &config, |_, _| {});
    let residual = outcome.vertex.iter().map(|&x| x * x).sum::<T>().sqrt();
    if residual > tol.solve_tol * scale {
        return None;
    }
    Some(Polished {
        flow: outcome.flow,
        remainder: candidate,
        residual,
        iterations: outcome.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances;

    fn two_vertex() -> OrientedGraph {
        OrientedGraph::new(2, vec![(0, 1)]).unwrap()
    }

    #[test]
    fn zero_target_projects_to_zero() {
        let (g, _) = instances::counterexample::<f64>();
        let b = BoxSpec::ball(g.edge_count(), 1.0).unwrap();
        let p = project_onto_div_box(&g, &VertexField::zeros(9), &b, &Tolerances::default()).unwrap();
        assert!(p.divergence.norm_inf() < 1e-12);
        assert!(p.report.converged);
    }

    #[test]
    fn two_vertex_target_is_attained() {
        let g = two_vertex();
        let target = VertexField::from_f64(&[1.0, -1.0]).unwrap();
        for alpha in [1.0, 1.5, 4.0] {
            let b = BoxSpec::ball(1, alpha).unwrap();
            let p = project_onto_div_box(&g, &target, &b, &Tolerances::default()).unwrap();
            assert!(p.divergence.dist_inf(&target) < 1e-12);
            assert!((p.flow[0] + 1.0f64).abs() < 1e-12);
        }
    }

    #[test]
    fn counterexample_projection_at_alpha_one() {
        let (g, f) = instances::counterexample::<f64>();
        let b = BoxSpec::ball(g.edge_count(), 1.0).unwrap();
        let p = project_onto_div_box(&g, &f, &b, &Tolerances::default()).unwrap();
        let expected = instances::counterexample_rof(1.0).unwrap();
        assert!(p.remainder.dist_inf(&expected) < 1e-9, "{:?}", p.remainder);
        assert!(p.report.polished);
        assert!(b.contains(p.flow.as_slice(), 1e-12));
    }

    #[test]
    fn min_norm_of_free_box_is_zero() {
        let (g, _) = instances::counterexample::<f64>();
        let b = BoxSpec::ball(g.edge_count(), 1.0).unwrap();
        let p = min_norm_divergence(&g, &b, &Tolerances::default()).unwrap();
        assert!(p.divergence.norm_inf() < 1e-12);
    }

    #[test]
    fn min_norm_of_counterexample_pattern() {
        let (g, f) = instances::counterexample::<f64>();
        let tol = Tolerances::default();
        let pattern = crate::graph::sign_pattern(&g, &f, &tol).unwrap();
        let p = min_norm_divergence(&g, &pattern.subgradient_box(1.0), &tol).unwrap();
        let expected = [-1.0, -4.0, 1.0, 1.0, -1.0, 2.0, 2.0, 2.0, -2.0];
        for (a, b) in p.divergence.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn min_norm_singleton_box() {
        let g = two_vertex();
        let b = BoxSpec::new(vec![-1.0], vec![-1.0]).unwrap();
        let p = min_norm_divergence(&g, &b, &Tolerances::default()).unwrap();
        assert_eq!(p.divergence.as_slice(), &[1.0, -1.0]);
    }

    #[test]
    fn rejects_mismatched_box() {
        let g = two_vertex();
        let b = BoxSpec::<f64>::ball(3, 1.0).unwrap();
        assert!(project_onto_div_box(&g, &VertexField::zeros(2), &b, &Tolerances::default()).is_err());
    }
}
