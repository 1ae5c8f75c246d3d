//! Minimization of `Σ_v φ(u(v))` over `u ∈ base − div S`.

use crate::error::{Error, Result};
use crate::graph::{EdgeField, OrientedGraph, Tolerances, VertexField};
use crate::scalar::Scalar;

use super::accelerated::{accelerated_descent, vertex_values, AcceleratedConfig, VertexObjective};
use super::{FlowSet, SolveReport};

/// A convex function `φ: ℝ → ℝ` with a subgradient selection.
pub trait ConvexScalar<T: Scalar>: Send + Sync {
    fn evaluate(&self, x: T) -> T;

    /// Any element of `∂φ(x)`. Must be nondecreasing in `x`.
    fn subgradient(&self, x: T) -> T;

    /// Name and parameters, for reports.
    fn descriptor(&self) -> String;

    /// Upper bound on `φ''` over `[lo, hi]` when `φ'` is Lipschitz there.
    fn curvature_bound(&self, _lo: T, _hi: T) -> Option<T> {
        None
    }

    /// `argmin_x φ(x) + (x − v)² / (2 step)`.
    fn prox(&self, v: T, step: T) -> T {
        prox_by_bisection(self, v, step)
    }
}

/// Proximal point of a 1-D convex function by bisection on the monotone
/// optimality residual `x − v + step · φ'(x)`.
pub fn prox_by_bisection<T: Scalar, F: ConvexScalar<T> + ?Sized>(phi: &F, v: T, step: T) -> T {
    let g0 = phi.subgradient(v);
    if g0 == T::zero() {
        return v;
    }
    let (mut lo, mut hi) = if g0 > T::zero() {
        (v - step * g0, v)
    } else {
        (v, v - step * g0)
    };
    for _ in 0..200 {
        let mid = (lo + hi) * T::of(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if mid - v + step * phi.subgradient(mid) > T::zero() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (lo + hi) * T::of(0.5)
}

/// Algorithm used by [`min_separable_convex_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SeparableMethod {
    /// Accelerated gradient when `φ` reports a curvature bound, Moreau
    /// smoothing with continuation otherwise.
    #[default]
    Auto,
    /// Accelerated gradient on `φ` itself; requires a curvature bound.
    Accelerated,
    /// Accelerated gradient on Moreau envelopes of `φ` with shrinking
    /// smoothing parameter.
    Smoothed,
    /// Projected subgradient with step `c/√k` and best-iterate tracking.
    Subgradient,
}

struct PhiObjective<'a, T: Scalar> {
    phi: &'a dyn ConvexScalar<T>,
}

impl<T: Scalar> VertexObjective<T> for PhiObjective<'_, T> {
    fn value(&self, u: &[T]) -> T {
        u.iter().map(|&x| self.phi.evaluate(x)).sum()
    }

    fn gradient(&self, u: &[T], out: &mut [T]) {
        for (o, &x) in out.iter_mut().zip(u) {
            *o = self.phi.subgradient(x);
        }
    }
}

/// Moreau envelope `φ_μ(x) = min_y φ(y) + (x − y)²/(2μ)`, which is
/// `1/μ`-smooth and within `μ · G² / 2` of `φ` for `G`-Lipschitz `φ`.
struct MoreauObjective<'a, T: Scalar> {
    phi: &'a dyn ConvexScalar<T>,
    mu: T,
}

impl<T: Scalar> VertexObjective<T> for MoreauObjective<'_, T> {
    fn value(&self, u: &[T]) -> T {
        u.iter()
            .map(|&x| {
                let p = self.phi.prox(x, self.mu);
                self.phi.evaluate(p) + (x - p) * (x - p) / (T::of(2.0) * self.mu)
            })
            .sum()
    }

    fn gradient(&self, u: &[T], out: &mut [T]) {
        for (o, &x) in out.iter_mut().zip(u) {
            *o = (x - self.phi.prox(x, self.mu)) / self.mu;
        }
    }
}

fn true_objective<T: Scalar>(phi: &dyn ConvexScalar<T>, u: &[T]) -> T {
    u.iter().map(|&x| phi.evaluate(x)).sum()
}

/// Interval containing every vertex value of `base − div H`, `H ∈ S`.
fn reachable_range<T: Scalar, S: FlowSet<T> + ?Sized>(g: &OrientedGraph, base: &[T], set: &S) -> (T, T) {
    let mut reach = vec![T::zero(); g.vertex_count()];
    for (e, &(t, h)) in g.edges().iter().enumerate() {
        let b = set.edge_bound(e);
        reach[t] = reach[t] + b;
        reach[h] = reach[h] + b;
    }
    let lo = base.iter().zip(&reach).map(|(&b, &r)| b - r).fold(T::infinity(), T::min);
    let hi = base.iter().zip(&reach).map(|(&b, &r)| b + r).fold(T::neg_infinity(), T::max);
    (lo, hi)
}

/// Minimizes `Σ φ(u(v))` over `u = base − div H`, `H ∈ set`, with the
/// default method.
pub fn min_separable_convex_over_polytope<T: Scalar, S: FlowSet<T> + ?Sized>(
    g: &OrientedGraph,
    base: &VertexField<T>,
    set: &S,
    phi: &dyn ConvexScalar<T>,
    tol: &Tolerances<T>,
) -> Result<(VertexField<T>, SolveReport<T>)> {
    min_separable_convex_with(g, base, set, phi, tol, SeparableMethod::Auto)
}

pub fn min_separable_convex_with<T: Scalar, S: FlowSet<T> + ?Sized>(
    g: &OrientedGraph,
    base: &VertexField<T>,
    set: &S,
    phi: &dyn ConvexScalar<T>,
    tol: &Tolerances<T>,
    method: SeparableMethod,
) -> Result<(VertexField<T>, SolveReport<T>)> {
    tol.validate()?;
    g.check_vertex_field("base field", base)?;
    if set.len() != g.edge_count() {
        return Err(Error::LengthMismatch {
            what: "flow set",
            expected: g.edge_count(),
            found: set.len(),
        });
    }
    let (lo, hi) = reachable_range(g, base.as_slice(), set);
    let curvature = phi.curvature_bound(lo, hi).filter(|c| c.is_finite());
    let method = match method {
        SeparableMethod::Auto if curvature.is_some() => SeparableMethod::Accelerated,
        SeparableMethod::Auto => SeparableMethod::Smoothed,
        m => m,
    };
    let (u, report) = match method {
        SeparableMethod::Accelerated => {
            let c = curvature.ok_or(Error::InvalidParameter {
                name: "method",
                value: 0.0,
                reason: "accelerated method needs a curvature bound",
            })?;
            accelerated(g, base, set, phi, c, tol)
        }
        SeparableMethod::Smoothed => smoothed(g, base, set, phi, (lo, hi), tol),
        SeparableMethod::Subgradient => subgradient(g, base, set, phi, tol),
        SeparableMethod::Auto => unreachable!("resolved above"),
    };
    Ok((VertexField::new(u)?, report))
}

fn stall_window<T: Scalar>(tol: &Tolerances<T>) -> Option<(usize, T)> {
    Some((500, tol.objective_tol * T::of(1e-3)))
}

fn accelerated<T: Scalar, S: FlowSet<T> + ?Sized>(
    g: &OrientedGraph,
    base: &VertexField<T>,
    set: &S,
    phi: &dyn ConvexScalar<T>,
    curvature: T,
    tol: &Tolerances<T>,
) -> (Vec<T>, SolveReport<T>) {
    let norm_sq = T::of_usize(g.divergence_norm_sq_bound());
    let config = AcceleratedConfig {
        lipschitz: curvature.max(T::epsilon()) * norm_sq,
        tol: T::zero(),
        max_iterations: tol.max_iterations,
        stall: stall_window(tol),
    };
    let outcome = accelerated_descent(
        g,
        base.as_slice(),
        set,
        &PhiObjective { phi },
        vec![T::zero(); g.edge_count()],
        &config,
        |_, _| {},
    );
    let report = SolveReport {
        iterations: outcome.iterations,
        objective: outcome.objective,
        optimality: outcome.optimality,
        converged: outcome.converged,
        polished: false,
    };
    (outcome.vertex, report)
}

fn smoothed<T: Scalar, S: FlowSet<T> + ?Sized>(
    g: &OrientedGraph,
    base: &VertexField<T>,
    set: &S,
    phi: &dyn ConvexScalar<T>,
    (lo, hi): (T, T),
    tol: &Tolerances<T>,
) -> (Vec<T>, SolveReport<T>) {
    let n = T::of_usize(g.vertex_count().max(1));
    let norm_sq = T::of_usize(g.divergence_norm_sq_bound());
    let lipschitz_phi = phi
        .subgradient(lo)
        .abs()
        .max(phi.subgradient(hi).abs())
        .max(T::epsilon());

    let mut flow = vec![T::zero(); g.edge_count()];
    let mut best_u = base.as_slice().to_vec();
    vertex_values(g, base.as_slice(), &flow, &mut best_u);
    let mut best = true_objective(phi, &best_u);

    let mut mu = ((hi - lo) / lipschitz_phi * T::of(1e-2)).max(T::epsilon());
    let per_stage = (tol.max_iterations / 8).max(1000);
    let mut iterations = 0;
    let mut converged = false;
    let mut optimality = T::infinity();
    for _stage in 0..40 {
        // Smoothing bias n·μ·G²/2 must sit well inside the objective tolerance.
        let mu_final = T::of(0.02) * tol.objective_tol * (T::one() + best.abs()) / (n * lipschitz_phi * lipschitz_phi);
        let last = mu <= mu_final;
        let mu_stage = mu.max(mu_final);
        let config = AcceleratedConfig {
            lipschitz: norm_sq / mu_stage,
            tol: T::zero(),
            max_iterations: per_stage,
            stall: stall_window(tol),
        };
        let outcome = accelerated_descent(
            g,
            base.as_slice(),
            set,
            &MoreauObjective { phi, mu: mu_stage },
            flow,
            &config,
            |u, _| {
                let value = true_objective(phi, u);
                if value < best {
                    best = value;
                    best_u.copy_from_slice(u);
                }
            },
        );
        iterations += outcome.iterations;
        optimality = outcome.optimality;
        flow = outcome.flow;
        if last {
            converged = outcome.converged;
            break;
        }
        mu = mu_stage * T::of(0.1);
    }
    let report = SolveReport {
        iterations,
        objective: best,
        optimality,
        converged,
        polished: false,
    };
    (best_u, report)
}

fn subgradient<T: Scalar, S: FlowSet<T> + ?Sized>(
    g: &OrientedGraph,
    base: &VertexField<T>,
    set: &S,
    phi: &dyn ConvexScalar<T>,
    tol: &Tolerances<T>,
) -> (Vec<T>, SolveReport<T>) {
    let nv = g.vertex_count();
    let range = base.range();
    let c = if range > T::zero() { range } else { T::one() } / T::of_usize(nv).sqrt();

    let mut h = EdgeField::<T>::zeros(g.edge_count()).into_vec();
    let mut u = vec![T::zero(); nv];
    let mut vgrad = vec![T::zero(); nv];
    let mut egrad = vec![T::zero(); g.edge_count()];
    vertex_values(g, base.as_slice(), &h, &mut u);
    let mut best = true_objective(phi, &u);
    let mut best_u = u.clone();
    let mut last_improvement = 0;
    let window = 20_000;
    let mut iterations = 0;
    for k in 1..=tol.max_iterations {
        iterations = k;
        for (o, &x) in vgrad.iter_mut().zip(&u) {
            *o = phi.subgradient(x);
        }
        g.divergence_adjoint_into(&vgrad, &mut egrad);
        let norm = egrad.iter().map(|&d| d * d).sum::<T>().sqrt();
        if norm == T::zero() {
            break;
        }
        // The objective gradient in h is −divᵀ φ'(u).
        let step = c / (T::of_usize(k).sqrt() * norm);
        for (hv, &d) in h.iter_mut().zip(&egrad) {
            *hv = *hv + step * d;
        }
        set.project(&mut h);
        vertex_values(g, base.as_slice(), &h, &mut u);
        let value = true_objective(phi, &u);
        if value < best - tol.objective_tol * (T::one() + best.abs()) {
            last_improvement = k;
        }
        if value < best {
            best = value;
            best_u.copy_from_slice(&u);
        }
        if k - last_improvement > window {
            break;
        }
    }
    let report = SolveReport {
        iterations,
        objective: best,
        optimality: T::nan(),
        converged: iterations < tol.max_iterations,
        polished: false,
    };
    (best_u, report)
}
