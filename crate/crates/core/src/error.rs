use thiserror::Error;

/// Errors produced by graph construction and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("edge {edge} references vertex {vertex}, but the graph has {vertex_count} vertices")]
    VertexOutOfRange {
        edge: usize,
        vertex: usize,
        vertex_count: usize,
    },
    #[error("edge {edge} is a self-loop at vertex {vertex}")]
    SelfLoop { edge: usize, vertex: usize },
    #[error("edge {edge} ({tail}, {head}) duplicates an earlier edge")]
    DuplicateEdge { edge: usize, tail: usize, head: usize },
    #[error("edge {edge} ({tail}, {head}) is antiparallel to an earlier edge")]
    AntiparallelEdge { edge: usize, tail: usize, head: usize },
    #[error("graph is disconnected: vertex {vertex} is unreachable from vertex 0")]
    Disconnected { vertex: usize },
    #[error("{what}: expected length {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{what} contains a non-finite value at index {index}")]
    NonFinite { what: &'static str, index: usize },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("invalid box at edge {edge}: lower {lower} exceeds upper {upper} or is not finite")]
    InvalidBox { edge: usize, lower: f64, upper: f64 },
    #[error("graph is not tagged with a Cartesian layout")]
    NotCartesian,
    #[error("invalid Cartesian layout: {0}")]
    InvalidLayout(String),
    #[error("{solver} did not converge after {iterations} iterations (optimality {optimality:e})")]
    Nonconvergence {
        solver: &'static str,
        iterations: usize,
        optimality: f64,
    },
    #[error("failed to bracket a pattern change on [{lower}, {upper}]: {reason}")]
    Bracketing {
        lower: f64,
        upper: f64,
        reason: String,
    },
    #[error("flow integration failed at t = {time}: {reason}")]
    Flow { time: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
