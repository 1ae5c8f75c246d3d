//! The ROF model `min ½‖f − u‖² + α J(u)`: single solves, the exact solution
//! path in `α`, and the isotropic variant on Cartesian graphs.

use crate::engine::{project_onto_div_set, BoxSpec, FlowSet, IsotropicBall, SolveReport};
use crate::error::{Error, Result};
use crate::graph::pattern::pattern_with_threshold;
use crate::graph::{
    subdifferential_membership, EdgeField, Membership, OrientedGraph, SignPattern, Tolerances, VertexField,
};
use crate::path::{AffineSegment, PiecewiseAffinePath};
use crate::scalar::Scalar;

/// Minimizer `u_α` with a dual flow `F_α`, `‖F_α‖∞ ≤ α`, `u_α = f + div F_α`.
#[derive(Debug, Clone, PartialEq)]
pub struct RofSolution<T> {
    pub alpha: T,
    pub u: VertexField<T>,
    pub dual_flow: EdgeField<T>,
    pub report: SolveReport<T>,
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    if !(alpha >= T::zero() && alpha.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha.to_f64_lossy(),
            reason: "must be nonnegative and finite",
        });
    }
    Ok(())
}

fn trivial_solution<T: Scalar>(g: &OrientedGraph, f: &VertexField<T>, alpha: T) -> RofSolution<T> {
    RofSolution {
        alpha,
        u: f.clone(),
        dual_flow: EdgeField::zeros(g.edge_count()),
        report: SolveReport {
            iterations: 0,
            objective: T::zero(),
            optimality: T::zero(),
            converged: true,
            polished: true,
        },
    }
}

fn solve_in_set<T: Scalar, S: FlowSet<T> + ?Sized>(
    g: &OrientedGraph,
    f: &VertexField<T>,
    alpha: T,
    set: &S,
    tol: &Tolerances<T>,
    warm: Option<&EdgeField<T>>,
    solver: &'static str,
) -> Result<RofSolution<T>> {
    let projection = project_onto_div_set(g, f, set, tol, warm)?;
    if !projection.report.converged {
        return Err(Error::Nonconvergence {
            solver,
            iterations: projection.report.iterations,
            optimality: projection.report.optimality.to_f64_lossy(),
        });
    }
    Ok(RofSolution {
        alpha,
        u: projection.remainder,
        dual_flow: projection.flow.scaled(-T::one()),
        report: projection.report,
    })
}

/// Solves the anisotropic ROF problem: `u_α = f − P_{div B_α}(f)`.
pub fn rof_solve<T: Scalar>(
    g: &OrientedGraph,
    f: &VertexField<T>,
    alpha: T,
    tol: &Tolerances<T>,
) -> Result<RofSolution<T>> {
    rof_solve_warm(g, f, alpha, tol, None)
}

/// [`rof_solve`] started from a dual flow `F` of a nearby problem.
pub fn rof_solve_warm<T: Scalar>(
    g: &OrientedGraph,
    f: &VertexField<T>,
    alpha: T,
    tol: &Tolerances<T>,
    dual_start: Option<&EdgeField<T>>,
) -> Result<RofSolution<T>> {
    check_alpha(alpha)?;
    g.check_vertex_field("datum", f)?;
    if alpha == T::zero() {
        return Ok(trivial_solution(g, f, alpha));
    }
    let ball = BoxSpec::ball(g.edge_count(), alpha)?;
    let warm = dual_start.map(|fl| fl.scaled(-T::one()));
    solve_in_set(g, f, alpha, &ball, tol, warm.as_ref(), "rof")
}

/// Checks the optimality condition `(f − u_α)/α ∈ ∂J(u_α)`.
pub fn rof_optimality<T: Scalar>(
    g: &OrientedGraph,
    f: &VertexField<T>,
    solution: &RofSolution<T>,
    tol: &Tolerances<T>,
) -> Result<Membership<T>> {
    if solution.alpha <= T::zero() {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: solution.alpha.to_f64_lossy(),
            reason: "optimality check needs alpha > 0",
        });
    }
    let candidate = f.sub(&solution.u).scaled(T::one() / solution.alpha);
    subdifferential_membership(g, &solution.u, &candidate, tol)
}

/// ROF with the isotropic total variation of a Cartesian graph: the dual set
/// couples the vertical and horizontal edge at every grid node except on
/// the last row and column.
pub fn isotropic_rof_solve<T: Scalar>(
    g: &OrientedGraph,
    f: &VertexField<T>,
    alpha: T,
    tol: &Tolerances<T>,
) -> Result<RofSolution<T>> {
    check_alpha(alpha)?;
    g.check_vertex_field("datum", f)?;
    let ball = IsotropicBall::new(g, alpha)?;
    if alpha == T::zero() {
        return Ok(trivial_solution(g, f, alpha));
    }
    solve_in_set(g, f, alpha, &ball, tol, None, "isotropic rof")
}

struct Sample<T> {
    alpha: T,
    u: VertexField<T>,
    dual: EdgeField<T>,
    pattern: SignPattern,
}

struct PathSolver<'a, T: Scalar> {
    g: &'a OrientedGraph,
    f: &'a VertexField<T>,
    tol: &'a Tolerances<T>,
    threshold: T,
}

impl<T: Scalar> PathSolver<'_, T> {
    fn sample(&self, alpha: T, warm: Option<&Sample<T>>) -> Result<Sample<T>> {
        let start = warm
            .filter(|w| w.alpha > T::zero())
            .map(|w| w.dual.scaled(alpha / w.alpha));
        let sol = rof_solve_warm(self.g, self.f, alpha, self.tol, start.as_ref())?;
        let pattern = pattern_with_threshold(self.g, &sol.u, self.threshold);
        Ok(Sample {
            alpha,
            u: sol.u,
            dual: sol.dual_flow,
            pattern,
        })
    }

    fn narrow_enough(&self, lo: T, hi: T) -> bool {
        hi - lo <= self.tol.event_tol * T::one().max(hi)
    }

    /// Bisects `[lo, hi]` down to brackets of width `event_tol` around every
    /// pattern change.
    fn locate(&self, lo: Sample<T>, hi: Sample<T>, out: &mut Vec<(Sample<T>, Sample<T>)>) -> Result<()> {
        let mut stack = vec![(lo, hi)];
        while let Some((lo, hi)) = stack.pop() {
            if lo.pattern == hi.pattern {
                continue;
            }
            if self.narrow_enough(lo.alpha, hi.alpha) {
                out.push((lo, hi));
                continue;
            }
            let mid_alpha = (lo.alpha + hi.alpha) * T::of(0.5);
            let mid = self.sample(mid_alpha, Some(&lo))?;
            let mid_copy = Sample {
                alpha: mid.alpha,
                u: mid.u.clone(),
                dual: mid.dual.clone(),
                pattern: mid.pattern.clone(),
            };
            stack.push((mid, hi));
            stack.push((lo, mid_copy));
        }
        Ok(())
    }
}

/// Affine piece through two solves, stored as `a + α s`.
struct Piece<T> {
    left: T,
    right: T,
    offset: VertexField<T>,
    slope: VertexField<T>,
}

impl<T: Scalar> Piece<T> {
    fn at(&self, alpha: T) -> VertexField<T> {
        self.offset.add_scaled(alpha, &self.slope)
    }
}

/// Exact ROF solution path `α ↦ u_α`.
///
/// Pattern changes are bracketed on a geometric plus uniform grid and
/// bisected to `event_tol`; each knot is then placed where the affine
/// pieces on both sides meet. Every piece is fitted from two interior
/// solves and validated by a third.
pub fn rof_path<T: Scalar>(g: &OrientedGraph, f: &VertexField<T>, tol: &Tolerances<T>) -> Result<PiecewiseAffinePath<T>> {
    tol.validate()?;
    g.check_vertex_field("datum", f)?;
    let mean = f.mean_field();
    let solver = PathSolver {
        g,
        f,
        tol,
        threshold: tol.flat_threshold(f.range()),
    };
    let origin = Sample {
        alpha: T::zero(),
        u: f.clone(),
        dual: EdgeField::zeros(g.edge_count()),
        pattern: pattern_with_threshold(g, f, solver.threshold),
    };
    if origin.pattern.is_all_flat() {
        return Ok(PiecewiseAffinePath::constant(f.clone()));
    }

    let upper = stationary_upper_bound(&solver, f, &mean)?;
    let mut grid: Vec<T> = (1..=48).map(|i| upper * T::of_usize(i) / T::of(48.0)).collect();
    grid.extend((1..=24).map(|i| upper * T::of(0.5f64.powi(i))));
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid.dedup();

    let mut brackets = Vec::new();
    let mut previous = origin;
    for &alpha in &grid {
        let next = solver.sample(alpha, Some(&previous))?;
        let keep = Sample {
            alpha: next.alpha,
            u: next.u.clone(),
            dual: next.dual.clone(),
            pattern: next.pattern.clone(),
        };
        solver.locate(previous, next, &mut brackets)?;
        previous = keep;
    }
    if !previous.pattern.is_all_flat() {
        return Err(Error::Bracketing {
            lower: T::zero().to_f64_lossy(),
            upper: upper.to_f64_lossy(),
            reason: "solution is not constant at the upper end of the grid".into(),
        });
    }
    brackets.sort_by(|a, b| a.0.alpha.partial_cmp(&b.0.alpha).expect("finite"));

    // Pattern flips right at 0 are not knots; tiny segments between two
    // brackets are threshold artifacts around a single knot.
    let min_length = |a: T| tol.event_tol * T::of(10.0) * T::one().max(a);
    let mut merged: Vec<(T, T)> = Vec::new();
    for (lo, hi) in &brackets {
        if lo.alpha == T::zero() {
            continue;
        }
        match merged.last_mut() {
            Some(last) if lo.alpha - last.1 <= min_length(lo.alpha) => last.1 = hi.alpha,
            _ => merged.push((lo.alpha, hi.alpha)),
        }
    }

    let scale = T::one().max(f.norm_inf());
    let affinity_tol = T::of(10.0) * tol.solve_tol * scale;
    let mut pieces: Vec<Piece<T>> = Vec::with_capacity(merged.len() + 1);
    for k in 0..merged.len() {
        let left = if k == 0 { T::zero() } else { merged[k - 1].1 };
        let right = merged[k].0;
        pieces.push(fit_piece(&solver, left, right, affinity_tol)?);
    }
    pieces.push(Piece {
        left: merged.last().map_or(T::zero(), |b| b.1),
        right: T::infinity(),
        offset: mean.clone(),
        slope: VertexField::zeros(f.len()),
    });

    let mut knots = vec![T::zero()];
    for (k, &(lo, hi)) in merged.iter().enumerate() {
        let (a, b) = (&pieces[k], &pieces[k + 1]);
        let fallback = (lo + hi) * T::of(0.5);
        let knot = intersect(a, b).filter(|&x| x > *knots.last().expect("nonempty") && x > a.left && x < b.right);
        knots.push(knot.unwrap_or(fallback));
    }

    let segments = pieces[..merged.len()]
        .iter()
        .zip(&knots)
        .map(|(p, &start)| AffineSegment {
            start,
            value: p.at(start),
            slope: p.slope.clone(),
        })
        .collect();
    PiecewiseAffinePath::new(knots, segments, mean)
}

/// Doubles `‖f − f̄‖ / ‖∂°J(f)‖` until the ROF solution is constant.
fn stationary_upper_bound<T: Scalar>(solver: &PathSolver<'_, T>, f: &VertexField<T>, mean: &VertexField<T>) -> Result<T> {
    let pattern = pattern_with_threshold(solver.g, f, solver.threshold);
    let section = crate::engine::min_norm_divergence(solver.g, &pattern.subgradient_box(T::one()), solver.tol)?;
    let norm = section.divergence.norm2();
    let spread = f.dist2(mean);
    let mut upper = if norm > T::zero() { spread / norm } else { spread };
    upper = upper.max(T::of(1e-6) * T::one().max(spread));
    for _ in 0..64 {
        let s = solver.sample(upper, None)?;
        if s.pattern.is_all_flat() {
            return Ok(upper);
        }
        upper = upper * T::of(2.0);
    }
    Err(Error::Bracketing {
        lower: 0.0,
        upper: upper.to_f64_lossy(),
        reason: "no alpha found at which the solution is constant".into(),
    })
}

/// Affine piece on `[left, right]` from solves at the quarter points,
/// validated at the midpoint.
fn fit_piece<T: Scalar>(solver: &PathSolver<'_, T>, left: T, right: T, affinity_tol: T) -> Result<Piece<T>> {
    let width = right - left;
    let (q1, q3) = (left + width * T::of(0.25), left + width * T::of(0.75));
    let a = solver.sample(q1, None)?;
    let b = solver.sample(q3, None)?;
    let slope = b.u.sub(&a.u).scaled(T::one() / (q3 - q1));
    let offset = a.u.add_scaled(-q1, &slope);
    let piece = Piece {
        left,
        right,
        offset,
        slope,
    };
    let mid = solver.sample(left + width * T::of(0.5), None)?;
    let gap = mid.u.dist_inf(&piece.at(mid.alpha));
    if a.pattern != b.pattern || gap > affinity_tol {
        return Err(Error::Bracketing {
            lower: left.to_f64_lossy(),
            upper: right.to_f64_lossy(),
            reason: format!("segment is not affine (midpoint deviation {:e})", gap.to_f64_lossy()),
        });
    }
    Ok(piece)
}

/// Parameter where two affine pieces meet, in the least-squares sense.
fn intersect<T: Scalar>(a: &Piece<T>, b: &Piece<T>) -> Option<T> {
    let ds = b.slope.sub(&a.slope);
    let denom = ds.dot(&ds);
    if denom <= T::epsilon() * T::one().max(a.slope.dot(&a.slope)) {
        return None;
    }
    let x = -b.offset.sub(&a.offset).dot(&ds) / denom;
    x.is_finite().then_some(x)
}
