//! Comparison of ROF and the TV flow: jump sets, the equivalence conditions,
//! the one-dimensional taut string, and the counterexample harness.

use crate::error::{Error, Result};
use crate::flow::{flow_solve, FlowTrajectory};
use crate::graph::pattern::pattern_with_threshold;
use crate::graph::{subdifferential_membership, total_variation, OrientedGraph, Tolerances, VertexField};
use crate::instances;
use crate::rof::{rof_path, rof_solve, RofSolution};
use crate::scalar::Scalar;

/// Edges whose endpoint values differ by more than `flat_tol · range(u)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JumpSet {
    edges: Vec<usize>,
}

impl JumpSet {
    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.edges.binary_search(&edge).is_ok()
    }

    pub fn is_subset(&self, other: &JumpSet) -> bool {
        self.edges.iter().all(|&e| other.contains(e))
    }

    pub fn is_strict_subset(&self, other: &JumpSet) -> bool {
        self.is_subset(other) && self.len() < other.len()
    }

    /// Edges in `self` but not in `other`.
    pub fn difference(&self, other: &JumpSet) -> Vec<usize> {
        self.edges.iter().copied().filter(|&e| !other.contains(e)).collect()
    }
}

pub fn jump_set<T: Scalar>(g: &OrientedGraph, u: &VertexField<T>, tol: &Tolerances<T>) -> Result<JumpSet> {
    g.check_vertex_field("vertex field", u)?;
    let pattern = pattern_with_threshold(g, u, tol.flat_threshold(u.range()));
    Ok(JumpSet {
        edges: pattern.jump_edges(),
    })
}

/// ROF minimizer `u_α` against the flow value `u(α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport<T> {
    pub alpha: T,
    pub rof: VertexField<T>,
    pub flow: VertexField<T>,
    pub distance_inf: T,
    pub distance_2: T,
    /// `−(1/α) ∫₀^α u′ ∈ ∂J(u(α))`, which holds iff `u_α = u(α)`.
    pub averaged_derivative_member: bool,
    pub membership_residual: T,
    /// `⟨−u′(t), u(α)⟩ = J(u(α))` on every segment inside `(0, α)`, which
    /// implies `u_α = u(α)`.
    pub sufficient_condition: bool,
    /// `α ≤ t₁`.
    pub first_segment: bool,
}

impl<T: Scalar> EquivalenceReport<T> {
    pub fn equal_within(&self, limit: T) -> bool {
        self.distance_inf <= limit
    }
}

/// Builds an [`EquivalenceReport`], integrating the flow first.
pub fn equivalence_report<T: Scalar>(
    g: &OrientedGraph,
    f: &VertexField<T>,
    alpha: T,
    tol: &Tolerances<T>,
) -> Result<EquivalenceReport<T>> {
    let trajectory = flow_solve(g, f, tol)?;
    equivalence_report_with(g, f, &trajectory, alpha, tol)
}

/// [`equivalence_report`] reusing an already integrated trajectory of `f`.
pub fn equivalence_report_with<T: Scalar>(
    g: &OrientedGraph,
    f: &VertexField<T>,
    trajectory: &FlowTrajectory<T>,
    alpha: T,
    tol: &Tolerances<T>,
) -> Result<EquivalenceReport<T>> {
    if !(alpha > T::zero() && alpha.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha.to_f64_lossy(),
            reason: "must be positive and finite",
        });
    }
    let rof: RofSolution<T> = rof_solve(g, f, alpha, tol)?;
    let flow = trajectory.value_at(alpha);

    let knots = trajectory.path().knots();
    let mut integral = VertexField::zeros(f.len());
    let mut sufficient = true;
    let j_alpha = total_variation(g, &flow)?;
    let inner_tol = T::of(10.0) * tol.solve_tol * (T::one() + j_alpha);
    for (k, d) in trajectory.directions().enumerate() {
        let (start, end) = (knots[k], knots[k + 1]);
        if start >= alpha {
            break;
        }
        let length = end.min(alpha) - start;
        integral = integral.add_scaled(length, d);
        let pairing = -d.dot(&flow);
        if (pairing - j_alpha).abs() > inner_tol {
            sufficient = false;
        }
    }
    let averaged = integral.scaled(-T::one() / alpha);
    let membership = subdifferential_membership(g, &flow, &averaged, tol)?;

    let first_break = trajectory.breakpoints().first().copied().unwrap_or(T::infinity());
    Ok(EquivalenceReport {
        alpha,
        distance_inf: rof.u.dist_inf(&flow),
        distance_2: rof.u.dist2(&flow),
        rof: rof.u,
        flow,
        averaged_derivative_member: membership.member,
        membership_residual: membership.residual,
        sufficient_condition: sufficient,
        first_segment: alpha <= first_break + tol.event_tol,
    })
}

/// One-dimensional ROF by the taut-string construction: the shortest path
/// from `(0, 0)` to `(n, Σf)` inside the tube of radius `alpha` around the
/// cumulative sums, differentiated back to a sequence.
///
/// Equals `rof_solve` on [`OrientedGraph::path`] with the same data.
pub fn taut_string_1d<T: Scalar>(f: &[T], alpha: T) -> Result<Vec<T>> {
    if f.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if !(alpha >= T::zero() && alpha.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha.to_f64_lossy(),
            reason: "must be nonnegative and finite",
        });
    }
    if let Some(index) = f.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { what: "signal", index });
    }
    let n = f.len();
    if alpha == T::zero() || n == 1 {
        return Ok(f.to_vec());
    }
    let mut cumulative = vec![T::zero(); n + 1];
    for i in 0..n {
        cumulative[i + 1] = cumulative[i] + f[i];
    }
    let lower = |k: usize| if k == 0 || k == n { cumulative[k] } else { cumulative[k] - alpha };
    let upper = |k: usize| if k == 0 || k == n { cumulative[k] } else { cumulative[k] + alpha };

    let mut string = vec![T::zero(); n + 1];
    let (mut anchor, mut height) = (0usize, T::zero());
    while anchor < n {
        let mut smin = T::neg_infinity();
        let mut smax = T::infinity();
        let (mut lo_idx, mut hi_idx) = (anchor, anchor);
        let mut bend = None;
        for j in anchor + 1..=n {
            let run = T::of_usize(j - anchor);
            let s_lo = (lower(j) - height) / run;
            let s_hi = (upper(j) - height) / run;
            if s_lo > smax {
                bend = Some((hi_idx, upper(hi_idx)));
                break;
            }
            if s_hi < smin {
                bend = Some((lo_idx, lower(lo_idx)));
                break;
            }
            if s_lo >= smin {
                smin = s_lo;
                lo_idx = j;
            }
            if s_hi <= smax {
                smax = s_hi;
                hi_idx = j;
            }
        }
        let (next, next_height) = bend.unwrap_or((n, cumulative[n]));
        let slope = (next_height - height) / T::of_usize(next - anchor);
        for k in anchor + 1..=next {
            string[k] = height + slope * T::of_usize(k - anchor);
        }
        string[next] = next_height;
        anchor = next;
        height = next_height;
    }
    Ok((0..n).map(|i| string[i + 1] - string[i]).collect())
}

/// One comparison in the counterexample harness.
#[derive(Debug, Clone, PartialEq)]
pub struct HarnessCheck {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleReport {
    pub checks: Vec<HarnessCheck>,
    pub rof_breakpoints: Vec<f64>,
    pub flow_breakpoints: Vec<f64>,
}

impl CounterexampleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HarnessCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

struct Checks(Vec<HarnessCheck>);

impl Checks {
    fn value(&mut self, name: String, expected: f64, actual: f64, tolerance: f64) {
        let passed = (expected - actual).abs() <= tolerance;
        self.0.push(HarnessCheck {
            name,
            expected,
            actual,
            tolerance,
            passed,
        });
    }

    fn holds(&mut self, name: &str, condition: bool) {
        self.value(name.to_string(), 1.0, if condition { 1.0 } else { 0.0 }, 0.0);
    }
}

fn nearest(values: &[f64], target: f64) -> f64 {
    values
        .iter()
        .copied()
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
        .unwrap_or(f64::NAN)
}

/// Reproduces the closed-form solutions of the 3×3 counterexample: ROF and
/// flow values and special-edge dual values at α, t ∈ {0.2, 1, 3}, the
/// breakpoints, jump-set nonmonotonicity, the nonequivalence at α = 1, and
/// the jump created for the variant datum.
pub fn counterexample_harness(tol: &Tolerances<f64>) -> Result<CounterexampleReport> {
    const VALUE_TOL: f64 = 1e-6;
    let (g, f) = instances::counterexample::<f64>();
    let special = instances::counterexample_special_edge(&g).expect("special edge present");
    let (v22, v32) = (g.vertex_index("v22").expect("v22"), g.vertex_index("v32").expect("v32"));
    let mut checks = Checks(Vec::new());

    let path = rof_path(&g, &f, tol)?;
    let trajectory = flow_solve(&g, &f, tol)?;
    let samples = [0.2, 1.0, 3.0];

    for &alpha in &samples {
        let solution = rof_solve(&g, &f, alpha, tol)?;
        let expected = instances::counterexample_rof(alpha).expect("inside [0, 4]");
        for v in 0..g.vertex_count() {
            checks.value(format!("rof alpha={alpha} u({})", g.vertex_name(v)), expected[v], solution.u[v], VALUE_TOL);
        }
        let along_path = path.evaluate(alpha).dist_inf(&expected);
        checks.value(format!("rof path alpha={alpha} max deviation"), 0.0, along_path, VALUE_TOL);
        let dual = instances::counterexample_rof_special_flow(alpha).expect("inside [0, 4]");
        checks.value(format!("rof alpha={alpha} F(v32,v22)"), dual, solution.dual_flow[special], VALUE_TOL);
    }
    for &t in &samples {
        let value = trajectory.value_at(t);
        let expected = instances::counterexample_flow(t).expect("inside [0, 4]");
        for v in 0..g.vertex_count() {
            checks.value(format!("flow t={t} u({})", g.vertex_name(v)), expected[v], value[v], VALUE_TOL);
        }
        let dual = instances::counterexample_flow_special_flow(t).expect("inside [0, 4]");
        checks.value(format!("flow t={t} F(v32,v22)"), dual, trajectory.antiderivative_at(t)[special], VALUE_TOL);
    }

    let rof_breaks: Vec<f64> = path.breakpoints().to_vec();
    let flow_breaks: Vec<f64> = trajectory.breakpoints().to_vec();
    checks.value("rof breakpoint 2/5".into(), 0.4, nearest(&rof_breaks, 0.4), tol.event_tol);
    checks.value("rof breakpoint 2".into(), 2.0, nearest(&rof_breaks, 2.0), tol.event_tol);
    let rof_count = rof_breaks.iter().filter(|&&b| b <= 4.0).count();
    checks.value("rof breakpoints in [0, 4]".into(), 2.0, rof_count as f64, 0.0);
    checks.value("flow breakpoint 2/5".into(), 0.4, nearest(&flow_breaks, 0.4), tol.event_tol);
    let flow_count = flow_breaks.iter().filter(|&&b| b <= 4.0).count();
    checks.value("flow breakpoints in [0, 4]".into(), 1.0, flow_count as f64, 0.0);

    let gamma_rof_1 = jump_set(&g, &rof_solve(&g, &f, 1.0, tol)?.u, tol)?;
    let u3 = rof_solve(&g, &f, 3.0, tol)?.u;
    let gamma_rof_3 = jump_set(&g, &u3, tol)?;
    checks.value("rof jump set size alpha=1".into(), 11.0, gamma_rof_1.len() as f64, 0.0);
    checks.holds("rof jump set alpha=1 lacks (v32,v22)", !gamma_rof_1.contains(special));
    checks.holds("rof jump set alpha=1 strictly inside alpha=3", gamma_rof_1.is_strict_subset(&gamma_rof_3));
    checks.holds("rof jump set alpha=3 adds exactly (v32,v22)", gamma_rof_3.difference(&gamma_rof_1) == vec![special]);
    checks.value("sign of u3(v32) - u3(v22)".into(), -1.0, (u3[v32] - u3[v22]).signum(), 0.0);
    checks.value("sign of f(v32) - f(v22)".into(), 1.0, (f[v32] - f[v22]).signum(), 0.0);

    let gamma_flow_switch = jump_set(&g, &trajectory.value_at(0.4), tol)?;
    let gamma_flow_1 = jump_set(&g, &trajectory.value_at(1.0), tol)?;
    checks.holds("flow jump set t=2/5 lacks (v32,v22)", !gamma_flow_switch.contains(special));
    checks.holds("flow jump set t=2/5 strictly inside t=1", gamma_flow_switch.is_strict_subset(&gamma_flow_1));

    let equivalence = equivalence_report_with(&g, &f, &trajectory, 1.0, tol)?;
    checks.value("nonequivalence |u_1 - u(1)|_inf".into(), 0.3, equivalence.distance_inf, VALUE_TOL);
    checks.holds("averaged derivative at alpha=1 not in subdifferential", !equivalence.averaged_derivative_member);
    let early = equivalence_report_with(&g, &f, &trajectory, 0.3, tol)?;
    checks.value("equivalence |u_0.3 - u(0.3)|_inf".into(), 0.0, early.distance_inf, VALUE_TOL);

    let (_, variant) = instances::counterexample_variant::<f64>();
    let variant_trajectory = flow_solve(&g, &variant, tol)?;
    for s in [0.2, 1.0, 2.0, 3.0] {
        let expected = instances::counterexample_variant_solution(s).expect("inside [0, 4]");
        let rof = rof_solve(&g, &variant, s, tol)?.u;
        checks.value(format!("variant rof alpha={s} max deviation"), 0.0, rof.dist_inf(&expected), VALUE_TOL);
        let flow = variant_trajectory.value_at(s);
        checks.value(format!("variant flow t={s} max deviation"), 0.0, flow.dist_inf(&expected), VALUE_TOL);
    }
    let variant_2 = rof_solve(&g, &variant, 2.0, tol)?.u;
    checks.holds("variant datum has no jump on (v32,v22)", !jump_set(&g, &variant, tol)?.contains(special));
    checks.holds("variant alpha=2 has a jump on (v32,v22)", jump_set(&g, &variant_2, tol)?.contains(special));
    checks.value("variant alpha=2 u(v22) - u(v32)".into(), 2.0, variant_2[v22] - variant_2[v32], VALUE_TOL);

    Ok(CounterexampleReport {
        checks: checks.0,
        rof_breakpoints: rof_breaks,
        flow_breakpoints: flow_breaks,
    })
}
