//! First-order solvers shared by the ROF, flow and minimality modules:
//! projection onto `div S` for boxes and grouped balls, and minimization of
//! separable convex objectives over `base − div S`.

mod accelerated;
mod flowset;
mod projection;
mod separable;

pub use flowset::{BoxSpec, FlowSet, IsotropicBall};
pub use projection::{min_norm_divergence, project_onto_div_box, project_onto_div_set, DivProjection};
pub use separable::{
    min_separable_convex_over_polytope, min_separable_convex_with, prox_by_bisection, ConvexScalar,
    SeparableMethod,
};

/// Outcome summary of an iterative solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport<T> {
    pub iterations: usize,
    pub objective: T,
    /// Scaled projected-gradient norm, or scaled feasibility residual when
    /// the solution was polished onto its active face.
    pub optimality: T,
    pub converged: bool,
    /// The returned point was snapped onto a certified active face.
    pub polished: bool,
}
