use crate::engine::project_onto_div_box;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::pattern::sign_pattern;
use super::{EdgeField, OrientedGraph, Tolerances, VertexField};

/// Verdict of [`subdifferential_membership`].
#[derive(Debug, Clone, PartialEq)]
pub struct Membership<T> {
    pub member: bool,
    /// Flow in `B_{1,u}` whose divergence is closest to the candidate.
    pub witness: EdgeField<T>,
    /// `‖div witness − candidate‖₂`.
    pub residual: T,
}

/// Tests `candidate ∈ ∂J(u) = div B_{1,u}` by projecting the candidate onto
/// `div B_{1,u}`.
///
/// The candidate is a member when the projection residual is at most
/// `10 · solve_tol · max(1, ‖candidate‖∞)`. A projection that fails to
/// converge is an error, never a negative verdict.
pub fn subdifferential_membership<T: Scalar>(
    g: &OrientedGraph,
    u: &VertexField<T>,
    candidate: &VertexField<T>,
    tol: &Tolerances<T>,
) -> Result<Membership<T>> {
    g.check_vertex_field("candidate", candidate)?;
    let pattern = sign_pattern(g, u, tol)?;
    let projection = project_onto_div_box(g, candidate, &pattern.subgradient_box(T::one()), tol)?;
    if !projection.report.converged {
        return Err(Error::Nonconvergence {
            solver: "subdifferential membership",
            iterations: projection.report.iterations,
            optimality: projection.report.optimality.to_f64_lossy(),
        });
    }
    let residual = projection.remainder.norm2();
    let scale = T::one().max(candidate.norm_inf());
    Ok(Membership {
        member: residual <= T::of(10.0) * tol.solve_tol * scale,
        witness: projection.flow,
        residual,
    })
}
