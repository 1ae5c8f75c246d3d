//! Total-variation regularization (ROF) and total-variation flow for data on
//! the vertices of oriented graphs.

pub mod analysis;
pub mod engine;
pub mod error;
pub mod flow;
pub mod graph;
pub mod instances;
pub mod minimality;
pub mod path;
pub mod random;
pub mod rof;
mod scalar;

pub use analysis::{
    counterexample_harness, equivalence_report, equivalence_report_with, jump_set, taut_string_1d, CounterexampleReport,
    EquivalenceReport, HarnessCheck, JumpSet,
};
pub use engine::{
    min_norm_divergence, min_separable_convex_over_polytope, min_separable_convex_with, project_onto_div_box,
    project_onto_div_set, prox_by_bisection, BoxSpec, ConvexScalar, DivProjection, FlowSet, IsotropicBall,
    SeparableMethod, SolveReport,
};
pub use error::{Error, Result};
pub use flow::{flow_backward_euler, flow_solve, minimal_section, FlowTrajectory};
pub use graph::{
    divergence, sign_pattern, subdifferential_membership, total_variation, CartesianLayout, EdgeField, Membership,
    OrientedGraph, SignPattern, Tolerances, VertexField,
};
pub use path::{AffineSegment, PiecewiseAffinePath};
pub use rof::{isotropic_rof_solve, rof_optimality, rof_path, rof_solve, rof_solve_warm, RofSolution};
pub use scalar::Scalar;

pub type VertexField64 = VertexField<f64>;
pub type EdgeField64 = EdgeField<f64>;
pub type Tolerances64 = Tolerances<f64>;
pub type RofSolution64 = RofSolution<f64>;
pub type FlowTrajectory64 = FlowTrajectory<f64>;
pub type VertexField32 = VertexField<f32>;
pub type EdgeField32 = EdgeField<f32>;
pub type Tolerances32 = Tolerances<f32>;
pub type RofSolution32 = RofSolution<f32>;
pub type FlowTrajectory32 = FlowTrajectory<f32>;
