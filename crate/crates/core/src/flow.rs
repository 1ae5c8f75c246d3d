//! The total-variation flow `u' ∈ −∂J(u)`, `u(0) = f`, integrated exactly
//! from event to event along minimal sections.

use crate::engine::{min_norm_divergence, DivProjection};
use crate::error::{Error, Result};
use crate::graph::pattern::pattern_with_threshold;
use crate::graph::{EdgeField, OrientedGraph, SignPattern, Tolerances, VertexField};
use crate::path::{AffineSegment, PiecewiseAffinePath};
use crate::rof::rof_solve_warm;
use crate::scalar::Scalar;

/// Piecewise affine flow solution with per-segment witnesses.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrajectory<T> {
    path: PiecewiseAffinePath<T>,
    /// `H_k ∈ B_{1,u}` on segment `k`, with `div H_k = −d_k`.
    flows: Vec<EdgeField<T>>,
    /// `F(t_k)` at every knot; `u(t) = f + div F(t)`.
    antiderivatives: Vec<EdgeField<T>>,
    diagnostics: Vec<String>,
}

impl<T: Scalar> FlowTrajectory<T> {
    pub fn path(&self) -> &PiecewiseAffinePath<T> {
        &self.path
    }

    /// Event times `t_1 < … < t_M`.
    pub fn breakpoints(&self) -> &[T] {
        self.path.breakpoints()
    }

    /// `t_M`, from which on `u(t) = f̄`.
    pub fn stationary_time(&self) -> T {
        self.path.stationary_from()
    }

    /// Right derivative `d_k` on each segment.
    pub fn directions(&self) -> impl Iterator<Item = &VertexField<T>> {
        self.path.segments().iter().map(|s| &s.slope)
    }

    pub fn flows(&self) -> &[EdgeField<T>] {
        &self.flows
    }

    pub fn antiderivatives(&self) -> &[EdgeField<T>] {
        &self.antiderivatives
    }

    /// Notes on pattern refinements that hit the iteration cap.
    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    pub fn value_at(&self, t: T) -> VertexField<T> {
        self.path.evaluate(t)
    }

    /// `F(t)`, one antiderivative of `−H` among possibly many.
    pub fn antiderivative_at(&self, t: T) -> EdgeField<T> {
        match self.path.segment_index(t) {
            Some(k) => {
                let start = self.path.knots()[k];
                self.antiderivatives[k].add_scaled(start - t, &self.flows[k])
            }
            None => self.antiderivatives.last().expect("at least one knot").clone(),
        }
    }
}

fn check_converged<T: Scalar>(projection: &DivProjection<T>, solver: &'static str) -> Result<()> {
    if projection.report.converged {
        Ok(())
    } else {
        Err(Error::Nonconvergence {
            solver,
            iterations: projection.report.iterations,
            optimality: projection.report.optimality.to_f64_lossy(),
        })
    }
}

/// Minimal section `∂°J(u)`: the least-norm element of `div B_{1,u}`.
pub fn minimal_section<T: Scalar>(g: &OrientedGraph, u: &VertexField<T>, tol: &Tolerances<T>) -> Result<VertexField<T>> {
    g.check_vertex_field("vertex field", u)?;
    let pattern = pattern_with_threshold(g, u, tol.flat_threshold(u.range()));
    let projection = min_norm_divergence(g, &pattern.subgradient_box(T::one()), tol)?;
    check_converged(&projection, "minimal section")?;
    Ok(projection.divergence)
}

/// Direction and witness for a pattern that is stable under its own
/// direction, or the last iterate when the cap is hit.
struct Direction<T> {
    direction: VertexField<T>,
    witness: EdgeField<T>,
    pattern: SignPattern,
    fixed_point: bool,
}

/// Minimal section of the pattern, refined by splitting flat edges whose
/// endpoints the direction separates until the labels stop changing.
fn stable_direction<T: Scalar>(g: &OrientedGraph, mut pattern: SignPattern, tol: &Tolerances<T>) -> Result<Direction<T>> {
    let mut last = None;
    for _ in 0..=g.edge_count() {
        let projection = min_norm_divergence(g, &pattern.subgradient_box(T::one()), tol)?;
        check_converged(&projection, "flow direction")?;
        let direction = projection.divergence.scaled(-T::one());
        let split_tol = tol.flat_tol * T::one().max(direction.norm_inf());
        let mut refined = pattern.clone();
        for (e, &(t, h)) in g.edges().iter().enumerate() {
            let dd = direction[t] - direction[h];
            if pattern.labels()[e] == 0 && dd.abs() > split_tol {
                refined.set(e, if dd > T::zero() { 1 } else { -1 });
            }
        }
        let stable = refined == pattern;
        last = Some(Direction {
            direction,
            witness: projection.flow,
            pattern: refined.clone(),
            fixed_point: stable,
        });
        if stable {
            break;
        }
        pattern = refined;
    }
    Ok(last.expect("at least one iteration"))
}

/// Sets every connected group of vertices joined by near-flat edges to its mean.
fn snap_flat_groups<T: Scalar>(g: &OrientedGraph, u: &mut VertexField<T>, threshold: T) {
    let n = g.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for &(t, h) in g.edges() {
        if (u[t] - u[h]).abs() <= threshold {
            let (a, b) = (find(&mut parent, t), find(&mut parent, h));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut sums = vec![T::zero(); n];
    let mut counts = vec![0usize; n];
    for v in 0..n {
        let r = find(&mut parent, v);
        sums[r] = sums[r] + u[v];
        counts[r] += 1;
    }
    for v in 0..n {
        let r = find(&mut parent, v);
        if counts[r] > 1 {
            u[v] = sums[r] / T::of_usize(counts[r]);
        }
    }
}

/// Integrates the TV flow until it is stationary.
///
/// On each segment the state moves along `d = −∂°J(u)` until the first
/// nonflat edge difference reaches zero; the crossing time is exact for the
/// affine motion. Differences below `flat_tol · range(f)` are snapped to
/// their group mean before the next direction is computed.
pub fn flow_solve<T: Scalar>(g: &OrientedGraph, f: &VertexField<T>, tol: &Tolerances<T>) -> Result<FlowTrajectory<T>> {
    tol.validate()?;
    g.check_vertex_field("datum", f)?;
    let threshold = tol.flat_threshold(f.range());
    let mean = f.mean_field();
    let max_events = 100 * (g.edge_count() + g.vertex_count()) + 1000;

    let mut u = f.clone();
    let mut big_f = EdgeField::zeros(g.edge_count());
    let mut t = T::zero();
    let mut knots = vec![T::zero()];
    let mut segments = Vec::new();
    let mut flows = Vec::new();
    let mut antiderivatives = vec![big_f.clone()];
    let mut diagnostics = Vec::new();

    for _ in 0..max_events {
        let pattern = pattern_with_threshold(g, &u, threshold);
        if pattern.is_all_flat() {
            let terminal = if u.dist_inf(&mean) <= threshold { mean } else { u };
            let path = PiecewiseAffinePath::new(knots, segments, terminal)?;
            return Ok(FlowTrajectory {
                path,
                flows,
                antiderivatives,
                diagnostics,
            });
        }
        let dir = stable_direction(g, pattern, tol)?;
        let mut tau = T::infinity();
        for (e, &(a, b)) in g.edges().iter().enumerate() {
            let label = dir.pattern.labels()[e];
            let dd = dir.direction[a] - dir.direction[b];
            if label != 0 && T::of(label as f64) * dd < T::zero() {
                tau = tau.min(-(u[a] - u[b]) / dd);
            }
        }
        if !dir.fixed_point {
            diagnostics.push(format!(
                "pattern refinement did not settle at t = {}; stepping by event_tol",
                t.to_f64_lossy()
            ));
            tau = tau.min(tol.event_tol);
        }
        if !(tau.is_finite() && tau > T::zero()) {
            return Err(Error::Flow {
                time: t.to_f64_lossy(),
                reason: "no edge difference reaches zero along a nonzero direction".into(),
            });
        }
        segments.push(AffineSegment {
            start: t,
            value: u.clone(),
            slope: dir.direction.clone(),
        });
        u = u.add_scaled(tau, &dir.direction);
        snap_flat_groups(g, &mut u, threshold);
        big_f = big_f.add_scaled(-tau, &dir.witness);
        flows.push(dir.witness);
        t = t + tau;
        knots.push(t);
        antiderivatives.push(big_f.clone());
    }
    Err(Error::Flow {
        time: t.to_f64_lossy(),
        reason: format!("not stationary after {max_events} events"),
    })
}

/// Backward-Euler approximation of `u(t_end)`: repeated ROF steps of size
/// `h`, the last one shortened to land on `t_end`.
pub fn flow_backward_euler<T: Scalar>(
    g: &OrientedGraph,
    f: &VertexField<T>,
    t_end: T,
    h: T,
    tol: &Tolerances<T>,
) -> Result<VertexField<T>> {
    if !(h > T::zero() && h.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "step",
            value: h.to_f64_lossy(),
            reason: "must be positive and finite",
        });
    }
    if !(t_end >= T::zero() && t_end.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_end",
            value: t_end.to_f64_lossy(),
            reason: "must be nonnegative and finite",
        });
    }
    g.check_vertex_field("datum", f)?;
    let ratio = t_end / h;
    let steps = (ratio - ratio * T::epsilon() * T::of(4.0)).ceil().to_usize().unwrap_or(0);
    let mut u = f.clone();
    let mut dual: Option<EdgeField<T>> = None;
    for k in 0..steps {
        let step = if k + 1 == steps { t_end - h * T::of_usize(k) } else { h };
        let sol = rof_solve_warm(g, &u, step, tol, dual.as_ref())?;
        u = sol.u;
        dual = Some(sol.dual_flow);
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::divergence;
    use crate::instances;

    #[test]
    fn minimal_section_examples() {
        let tol = Tolerances::default();
        let (g, f) = instances::counterexample::<f64>();
        let expected = VertexField::from_f64(&[-1.0, -4.0, 1.0, 1.0, -1.0, 2.0, 2.0, 2.0, -2.0]).unwrap();
        assert!(minimal_section(&g, &f, &tol).unwrap().dist_inf(&expected) < 1e-10);
        let c = VertexField::constant(9, 5.0);
        assert!(minimal_section(&g, &c, &tol).unwrap().norm_inf() < 1e-12);
    }

    #[test]
    fn counterexample_trajectory() {
        let (g, f) = instances::counterexample::<f64>();
        let traj = flow_solve(&g, &f, &Tolerances::default()).unwrap();
        assert!((traj.breakpoints()[0] - 0.4).abs() < 1e-10);
        let special = instances::counterexample_special_edge(&g).unwrap();
        for t in [0.1, 0.2, 0.4, 1.0, 3.0, 4.0] {
            let expected = instances::counterexample_flow(t).unwrap();
            assert!(traj.value_at(t).dist_inf(&expected) < 1e-9, "t = {t}");
            let big_f = traj.antiderivative_at(t);
            let target = instances::counterexample_flow_special_flow(t).unwrap();
            assert!((big_f[special] - target).abs() < 1e-9);
            let rebuilt = f.add(&divergence(&g, &big_f).unwrap());
            assert!(rebuilt.dist_inf(&expected) < 1e-8);
        }
        assert_eq!(traj.value_at(1e6), f.mean_field());
        assert!(traj.diagnostics().is_empty());
    }

    #[test]
    fn two_vertex_eigenfunction_flow() {
        let g = OrientedGraph::new(2, vec![(0, 1)]).unwrap();
        let f = VertexField::<f64>::from_f64(&[1.0, -1.0]).unwrap();
        let traj = flow_solve(&g, &f, &Tolerances::default()).unwrap();
        assert_eq!(traj.breakpoints(), &[1.0]);
        assert!(traj.value_at(0.3).dist_inf(&f.scaled(0.7)) < 1e-12);
        let euler = flow_backward_euler(&g, &f, 0.5, 0.125, &Tolerances::default()).unwrap();
        assert!(euler.dist_inf(&f.scaled(0.5)) < 1e-12);
    }

    #[test]
    fn constant_datum_is_stationary() {
        let g = OrientedGraph::path(4).unwrap();
        let f = VertexField::constant(4, 2.5);
        let traj = flow_solve(&g, &f, &Tolerances::default()).unwrap();
        assert!(traj.breakpoints().is_empty());
        assert_eq!(traj.value_at(3.0), f);
        assert_eq!(flow_backward_euler(&g, &f, 0.0, 0.1, &Tolerances::default()).unwrap(), f);
    }

    #[test]
    fn backward_euler_rejects_bad_step() {
        let g = OrientedGraph::path(2).unwrap();
        let f = VertexField::from_f64(&[0.0, 1.0]).unwrap();
        assert!(flow_backward_euler(&g, &f, 1.0, 0.0, &Tolerances::default()).is_err());
    }
}
